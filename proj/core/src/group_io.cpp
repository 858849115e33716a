#define TOML_IMPLEMENTATION
#include "toml_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace carnot {
namespace detail {

toml::table parse_toml_text(const std::string& text, const std::string& origin) {
  try {
    return toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << origin << ":" << e.source().begin.line << ": " << e.description();
    fail(ErrorCode::ConfigError, os.str());
  }
}

toml::table parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml_text(buf.str(), path);
}

std::optional<double> opt_double(const toml::node_view<const toml::node>& node) {
  if (auto v = node.value<double>()) return *v;
  return std::nullopt;
}

double get_double(const toml::node_view<const toml::node>& node, const std::string& key) {
  if (auto v = opt_double(node)) return *v;
  fail(ErrorCode::ConfigError, "missing or non-numeric key '" + key + "'");
}

std::vector<double> get_double_array(const toml::node_view<const toml::node>& node,
                                     const std::string& key) {
  const toml::array* arr = node.as_array();
  if (!arr) fail(ErrorCode::ConfigError, "key '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(arr->size());
  for (const auto& el : *arr) {
    auto v = el.value<double>();
    if (!v) fail(ErrorCode::ConfigError, "key '" + key + "' holds a non-numeric entry");
    out.push_back(*v);
  }
  return out;
}

void push_number(toml::array& arr, double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15)
    arr.push_back(static_cast<std::int64_t>(v));
  else
    arr.push_back(v);
}

namespace {

std::vector<Mat> matrices_from(const toml::node_view<const toml::node>& node, int m, int n) {
  const toml::array* outer = node.as_array();
  if (!outer) fail(ErrorCode::ConfigError, "key 'B' must be an array of arrays");
  if (static_cast<int>(outer->size()) != n)
    fail(ErrorCode::DimensionOutOfRange, "B holds " + std::to_string(outer->size()) +
                                             " matrices, n = " + std::to_string(n));
  std::vector<Mat> out;
  for (std::size_t s = 0; s < outer->size(); ++s) {
    const auto flat = get_double_array(toml::node_view<const toml::node>((*outer)[s]), "B");
    if (static_cast<int>(flat.size()) != m * m)
      fail(ErrorCode::DimensionOutOfRange, "matrix " + std::to_string(s + 1) + " needs m*m entries");
    Mat B(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) B(i, j) = flat[static_cast<std::size_t>(i * m + j)];
    out.push_back(B);
  }
  return out;
}

int get_int(const toml::table& tbl, const char* key) {
  auto v = tbl[key].value<std::int64_t>();
  if (!v) fail(ErrorCode::ConfigError, std::string("missing integer key '") + key + "'");
  return static_cast<int>(*v);
}

}  // namespace

GroupSpec group_from_table(const toml::table& tbl) {
  const std::string kind = tbl["kind"].value_or<std::string>("explicit");
  const auto eps = opt_double(tbl["eps"]);
  GroupSpec spec;
  if (kind == "heisenberg") {
    spec = heisenberg(static_cast<int>(tbl["k"].value_or<std::int64_t>(1)));
  } else if (kind == "free2") {
    spec = free2(get_int(tbl, "m"));
  } else if (kind == "complexified_heisenberg") {
    spec = complexified_heisenberg();
  } else if (kind == "corank1") {
    const int m = get_int(tbl, "m");
    spec = corank1(matrices_from(tbl["B"], m, 1).front());
  } else if (kind == "explicit") {
    const int m = get_int(tbl, "m");
    const int n = get_int(tbl, "n");
    spec = validate_spec(m, n, matrices_from(tbl["B"], m, n), eps.value_or(1.0));
    if (!eps) spec = spec.with_eps(calibrate_eps(spec));
    return spec;
  } else {
    fail(ErrorCode::ConfigError, "unknown group kind '" + kind + "'");
  }
  if (eps) spec = spec.with_eps(*eps);
  return spec;
}

toml::table group_to_table(const GroupSpec& spec) {
  toml::table tbl;
  tbl.insert("m", spec.m());
  tbl.insert("n", spec.n());
  tbl.insert("eps", spec.eps());
  toml::array outer;
  for (const Mat& B : spec.B()) {
    toml::array flat;
    for (int i = 0; i < spec.m(); ++i)
      for (int j = 0; j < spec.m(); ++j) push_number(flat, B(i, j));
    outer.push_back(std::move(flat));
  }
  tbl.insert("B", std::move(outer));
  return tbl;
}

}  // namespace detail

GroupSpec parse_group_spec(const std::string& text) {
  return detail::group_from_table(detail::parse_toml_text(text, "<group spec>"));
}

GroupSpec load_group_spec(const std::string& path) {
  return detail::group_from_table(detail::parse_toml_file(path));
}

std::string format_group_spec(const GroupSpec& spec) {
  std::ostringstream os;
  os << detail::group_to_table(spec) << "\n";
  return os.str();
}

void save_group_spec(const GroupSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << format_group_spec(spec);
}

}  // namespace carnot
