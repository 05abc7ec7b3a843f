#pragma once

#include <string>
#include <vector>

namespace camforge::drift {

// Bundled 64-prompt probe set: eight per category across animals,
// architecture, food, humans, lifestyle, plants, scenery, and vehicles.
const std::vector<std::string>& default_prompts();

// One prompt per line; blank lines skipped.
std::vector<std::string> load_prompts(const std::string& path);

}  // namespace camforge::drift
