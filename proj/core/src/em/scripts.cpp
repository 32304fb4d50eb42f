#include "emview/em/scripts.hpp"

#include <map>

#include "emview/error.hpp"

namespace emview::em {
namespace detail {
const std::map<std::string, std::string>& embedded_scripts();
}

const std::string& script(std::string_view name) {
  const auto& all = detail::embedded_scripts();
  auto it = all.find(std::string(name));
  if (it == all.end()) fail(ErrorCode::InvalidArgument, "no shipped script named '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> script_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::embedded_scripts()) out.push_back(name);
  return out;
}

}  // namespace emview::em
