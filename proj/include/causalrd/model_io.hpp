#pragma once

#include <filesystem>
#include <optional>
#include <variant>

#include "causalrd/dbn.hpp"
#include "causalrd/network.hpp"
#include "json.hpp"

namespace causalrd {

using Json = nlohmann::ordered_json;

// A model document is a template when any variable is per_slice; otherwise
// it is a literal network (plain BN or an already unrolled DBN).
using ModelDocument = std::variant<DbnTemplate, DiscreteNetwork>;

ModelDocument model_from_json(const Json& doc);
Json to_json(const DiscreteNetwork& net);
Json to_json(const DbnTemplate& tpl);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

ModelDocument load_model(const std::filesystem::path& path);
// Loads and, for templates, unrolls to `horizon` (or the document's own
// horizon). Throws InvalidModel when a template has no horizon.
DiscreteNetwork load_network(const std::filesystem::path& path, std::optional<int> horizon = std::nullopt);
DiscreteNetwork to_network(const ModelDocument& doc, std::optional<int> horizon = std::nullopt);

void save_network(const std::filesystem::path& path, const DiscreteNetwork& net);

// Shortest round-trip decimal form, used by every text output.
std::string format_double(double value);

}  // namespace causalrd
