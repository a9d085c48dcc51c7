#pragma once

// Internal JSON plumbing. Reports are built as insertion-ordered JSON and
// dumped with a custom serializer so key order is stable and every double is
// written with 17 significant digits (reproducibility diffs).

#include <string>

#include <json.hpp>

#include "cosens/types.hpp"

namespace cosens {

using ojson = nlohmann::ordered_json;

ojson load_json_file(const std::string& path);

std::string dump_report(const ojson& j, int indent = 2);
void write_report_file(const std::string& path, const ojson& j);

}  // namespace cosens
