#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "slicepart/ailp.hpp"
#include "slicepart/bnb.hpp"
#include "slicepart/cost_model.hpp"
#include "slicepart/gnn.hpp"
#include "slicepart/graph_model.hpp"

namespace slicepart {

// Insertion-ordered JSON so written files keep a stable, readable key order.
using Json = nlohmann::ordered_json;

inline constexpr const char* kCheckpointSchema = "slicepart.gnn.v1";

Json to_json(const VnfFg& g);
VnfFg graph_from_json(const Json& j);

Json to_json(const DomainChain& chain);
DomainChain chain_from_json(const Json& j);

Json to_json(const AssignmentMask& mask);
AssignmentMask mask_from_json(const Json& j);

Json to_json(const ObjectiveWeights& w);
ObjectiveWeights weights_from_json(const Json& j);

Json to_json(const ObjectiveValue& v);
Json to_json(const BnbStats& s, bool include_timing = true);
Json to_json(const TrainHistory& h, bool include_timing = true);
Json to_json(const TrainConfig& c);

// Versioned checkpoint: layer shapes, row-major parameters, and an echo of
// the training configuration and weights.
Json checkpoint_json(const GnnModel& model, const TrainConfig& config, const ObjectiveWeights& w);
GnnModel model_from_checkpoint(const Json& j);

// "a,b,g,d,mu" -> weights; throws InvalidInput on malformed text.
ObjectiveWeights parse_weights(const std::string& text);

const char* to_string(NormalizationMode mode);

// File helpers; all throw InvalidInput on unreadable or malformed files.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace slicepart
