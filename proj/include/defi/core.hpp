#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace defi {

using AssetId = std::string;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownAsset : Error { using Error::Error; };
struct UnknownAction : Error { using Error::Error; };
struct UnknownVenue : Error { using Error::Error; };
struct NonFiniteResult : Error { using Error::Error; };
struct InsufficientBalance : Error { using Error::Error; };
struct ConstraintViolated : Error { using Error::Error; };
struct EmptyReserve : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// A storage location an action reads or writes. Trader balances use the
// reserved venue name "trader"; venue reserve fields use the asset symbol.
struct StorageKey {
    std::string venue;
    std::string field;
    auto operator<=>(const StorageKey&) const = default;
};

inline StorageKey trader_key(const AssetId& asset) { return {"trader", asset}; }

struct WorldState;

enum class VenueKind { ConstantProduct, BancorConverter, OneToOne, OracleShort };

std::string to_string(VenueKind k);
VenueKind venue_kind_from_string(const std::string& s);

struct MarketVenue {
    std::string venue_id;
    VenueKind kind = VenueKind::ConstantProduct;
    std::map<AssetId, double> reserves;

    // ConstantProduct: fee applied to the input amount.
    double fee_num = 997;
    double fee_den = 1000;

    // BancorConverter: conversion fee in parts-per-million plus per-side
    // connector ratios in parts-per-million.
    double fee_ppm = 1000;
    std::map<AssetId, double> ratio_ppm;

    // OracleShort: collateral scaling and the venue whose price it reads
    // (and pushes when a short executes).
    double collateral_ratio = 1.0;
    std::string oracle_venue;

    double fee_frac() const { return fee_num / fee_den; }
    bool has_asset(const AssetId& a) const { return reserves.count(a) != 0; }
    bool has_zero_reserve() const;
    void validate() const;

    // Directed pairs this venue can quote, oracle shorts excluded (they have
    // no output leg).
    std::vector<std::pair<AssetId, AssetId>> trade_pairs() const;
};

struct ActionSpec {
    std::string action_id;
    std::string venue;
    AssetId input_asset;
    std::optional<AssetId> output_asset;  // absent for non-returning actions
    std::set<StorageKey> storage_keys;

    bool returning() const { return output_asset.has_value(); }
};

// Derives the full storage-key set: trader balances for both legs plus every
// venue field the action can read or write.
std::set<StorageKey> derive_storage_keys(const ActionSpec& action, const MarketVenue& venue);

// State-aware variant: resolves an oracle short's oracle pool into concrete
// per-asset keys instead of the venue-only wildcard.
std::set<StorageKey> derive_storage_keys(const ActionSpec& action, const WorldState& state);

struct Catalog {
    std::vector<ActionSpec> actions;

    const ActionSpec& by_id(const std::string& action_id) const;
    const ActionSpec* find(const std::string& venue, const AssetId& in,
                           const AssetId& out) const;
};

struct WorldState {
    long long block_height = 0;
    std::map<AssetId, double> trader_balances;
    std::map<std::string, MarketVenue> venues;

    double balance(const AssetId& a) const;
    const MarketVenue& venue(const std::string& id) const;
    void validate() const;
};

struct Strategy {
    std::vector<std::string> path;  // action ids, pairwise distinct
    std::vector<double> params;     // input amount per action
    double revenue = 0.0;           // realized, base-asset units
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Amount received for amount_in of input_asset. Self-contained kinds only;
// OracleShort needs the world state to read its oracle.
double quote(const MarketVenue& venue, const AssetId& input_asset, double amount_in);
double quote(const WorldState& state, const std::string& venue_id,
             const AssetId& input_asset, double amount_in);

// Marginal price for an infinitesimal trade, closed form per kind.
double spot_price(const MarketVenue& venue, const AssetId& input_asset);
double spot_price(const WorldState& state, const std::string& venue_id,
                  const AssetId& input_asset);

// Executes one action, returning the successor state. The input state is
// untouched; untouched storage is copied verbatim.
WorldState apply_action(const WorldState& state, const Catalog& catalog,
                        const ActionSpec& action, double x);

// Storage keys whose values differ between two states.
std::set<StorageKey> storage_diff(const WorldState& a, const WorldState& b);

// Folds apply_action over the path and returns the base-asset delta.
// Enforces that every non-base balance returns to its initial value.
double strategy_revenue(const WorldState& state, const Catalog& catalog,
                        const AssetId& base, const std::vector<std::string>& path,
                        const std::vector<double>& params);

// Same fold without the restoration check; returns the final state.
WorldState simulate_path(const WorldState& state, const Catalog& catalog,
                         const std::vector<std::string>& path,
                         const std::vector<double>& params);

// Executes the path with full-amount chaining: the first action spends x1,
// every later action spends everything received by its predecessor (or x1
// again for a non-returning predecessor feed). Returns base delta and the
// realized per-action params. No restoration check.
std::pair<double, std::vector<double>> run_chained(const WorldState& state,
                                                   const Catalog& catalog,
                                                   const AssetId& base,
                                                   const std::vector<std::string>& path,
                                                   double x1);

inline constexpr double kStateRelTol = 1e-9;   // state equality tolerance
inline constexpr double kDerivRelTol = 1e-6;   // derivative agreement

}  // namespace defi
