#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "pdhj/path.hpp"

namespace pdhj {

// CSV form: header `t,x_1,...,x_d`, one row per grid node, values printed
// with 17 significant digits so a write/read cycle is lossless.
void write_path_csv(std::ostream& os, const Path& x);
Path read_path_csv(std::istream& is);

// JSON form: array of {"t": <time>, "x": [<x_1>, ..., <x_d>]} objects.
nlohmann::json path_to_json(const Path& x);
Path path_from_json(const nlohmann::json& j);

}  // namespace pdhj
