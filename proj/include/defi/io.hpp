#pragma once

#include <filesystem>
#include <string>

#include "defi/core.hpp"

namespace defi {

// Snapshot schema: one JSON document per block, amounts as decimal strings.
//   {block_height, balances:{asset:"amount"}, venues:[{venue_id, kind,
//    reserves:{asset:"amount"}, fee...}]}
std::string snapshot_to_json(const WorldState& state);
WorldState snapshot_from_json(const std::string& text);
WorldState load_snapshot(const std::filesystem::path& file);
void save_snapshot(const WorldState& state, const std::filesystem::path& file);

// Catalog schema: JSON list of actions. Storage keys are derived from the
// snapshot's venues when omitted.
std::string catalog_to_json(const Catalog& catalog);
Catalog catalog_from_json(const std::string& text);
Catalog load_catalog(const std::filesystem::path& file);
void save_catalog(const Catalog& catalog, const std::filesystem::path& file);

// Derives one action per directed tradable pair of every venue (plus a short
// action per oracle-short venue), with storage keys filled in.
Catalog derive_catalog(const WorldState& state);

// Fills in empty storage-key sets from the snapshot's venues.
void resolve_storage_keys(Catalog& catalog, const WorldState& state);

// The bundled 96-action preset over 25 assets: two swap directions per
// listed pool plus the DAI/SAI converter ("appendix-b-96").
Catalog catalog_preset_96();

// Named synthetic scenarios for gen-snapshot.
WorldState snapshot_preset(const std::string& name);
std::vector<std::string> snapshot_preset_names();

// Catalog matching a named preset: "fig5-bzx" restricts each pool to the one
// quoted direction (plus the short); other presets derive the full catalog.
Catalog catalog_preset(const std::string& name);

}  // namespace defi
