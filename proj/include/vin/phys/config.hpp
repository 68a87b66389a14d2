#pragma once

// SimSpec <-> human-readable key=value config files. Also exposes the
// generic key/value helpers reused by the dataset manifest.

#include <map>
#include <string>

#include "vin/phys/types.hpp"

namespace vin::phys {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_kv_text(const std::string& text);
KeyValues load_kv_file(const std::string& path);
void save_kv_file(const KeyValues& kv, const std::string& path);

KeyValues spec_to_kv(const SimSpec& spec);
SimSpec spec_from_kv(const KeyValues& kv);

SimSpec load_spec(const std::string& path);
void save_spec(const SimSpec& spec, const std::string& path);

}  // namespace vin::phys
