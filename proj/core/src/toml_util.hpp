#pragma once

#include "carnot/error.hpp"
#include "carnot/group.hpp"

#include <toml.hpp>

#include <optional>
#include <string>
#include <vector>

namespace carnot::detail {

toml::table parse_toml_text(const std::string& text, const std::string& origin);
toml::table parse_toml_file(const std::string& path);

double get_double(const toml::node_view<const toml::node>& node, const std::string& key);
std::optional<double> opt_double(const toml::node_view<const toml::node>& node);
std::vector<double> get_double_array(const toml::node_view<const toml::node>& node,
                                     const std::string& key);

// Accepts either an explicit group (m, n, B, optional eps) or a builtin tag.
GroupSpec group_from_table(const toml::table& tbl);
toml::table group_to_table(const GroupSpec& spec);

// Writes a value that is integral as a TOML integer so it round-trips exactly.
void push_number(toml::array& arr, double v);

}  // namespace carnot::detail
