#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace emview::em {

/// Source text of a shipped model script: "gmm", "gmm_scalar", "mlr", "moe",
/// "transitive_closure". Throws InvalidArgument for unknown names.
const std::string& script(std::string_view name);

std::vector<std::string> script_names();

}  // namespace emview::em
