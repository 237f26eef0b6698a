#include "allelic/law_spec.h"

#include <fstream>
#include <istream>
#include <set>

namespace allelic {

namespace {

auto trim(const std::string& s) -> std::string {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

auto parse_bool(const std::string& key, const std::string& v) -> bool {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(Errc::parse_error, key + ": expected true or false, got '" + v + "'");
}

// "pi[k,l]" -> (k, l)
auto parse_cell_key(const std::string& key) -> std::pair<std::size_t, std::size_t> {
  auto open = key.find('[');
  auto comma = key.find(',');
  auto close = key.find(']');
  if (key.rfind("pi[", 0) != 0 || comma == std::string::npos || close != key.size() - 1 || comma < open) {
    fail(Errc::parse_error, "bad table key '" + key + "', expected pi[k,l]");
  }
  try {
    return {std::stoull(trim(key.substr(open + 1, comma - open - 1))),
            std::stoull(trim(key.substr(comma + 1, close - comma - 1)))};
  } catch (const std::logic_error&) {
    fail(Errc::parse_error, "bad table key '" + key + "', expected pi[k,l]");
  }
}

}  // namespace

auto KeyValues::find(const std::string& key) const -> std::optional<std::string> {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

auto KeyValues::require(const std::string& key) const -> std::string {
  auto v = find(key);
  if (!v) fail(Errc::parse_error, source + ": missing key '" + key + "'");
  return *v;
}

auto KeyValues::with_prefix(const std::string& prefix) const -> KeyValues {
  auto out = KeyValues{source, {}};
  for (const auto& [k, v] : entries) {
    if (k.rfind(prefix, 0) == 0) out.entries.emplace_back(k.substr(prefix.size()), v);
  }
  return out;
}

auto read_key_values(std::istream& in, const std::string& source) -> KeyValues {
  auto kv = KeyValues{source, {}};
  auto seen = std::set<std::string>{};
  auto line_no = 0;
  for (auto line = std::string{}; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(Errc::parse_error, source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    // Table keys are normalised so that "pi[0, 1]" and "pi[0,1]" collide.
    if (key.rfind("pi[", 0) == 0 || key.rfind("law.pi[", 0) == 0) {
      auto compact = std::string{};
      for (auto c : key) {
        if (c != ' ' && c != '\t') compact += c;
      }
      key = compact;
    }
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) fail(Errc::parse_error, source + ":" + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) {
      fail(Errc::parse_error, source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    kv.entries.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

auto read_key_values_file(const std::string& path) -> KeyValues {
  auto in = std::ifstream{path};
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  return read_key_values(in, path);
}

auto parse_law(const KeyValues& spec) -> JointOffspringLaw {
  auto format = spec.require("format");
  auto tail = k_default_tail_eps;
  if (auto t = spec.find("tail")) tail = to_double(parse_rational(*t));
  auto degeneracy = Degeneracy::reject;
  if (auto d = spec.find("allow_degenerate"); d && parse_bool("allow_degenerate", *d)) degeneracy = Degeneracy::allow;

  auto allowed = std::set<std::string>{"format", "tail", "allow_degenerate"};
  auto check_keys = [&](bool table) {
    for (const auto& [k, v] : spec.entries) {
      if (allowed.count(k) || (table && k.rfind("pi[", 0) == 0)) continue;
      fail(Errc::parse_error, spec.source + ": key '" + k + "' does not apply to format " + format);
    }
  };

  if (format == "table") {
    check_keys(true);
    auto entries = std::vector<TableEntry>{};
    for (const auto& [k, v] : spec.entries) {
      if (k.rfind("pi[", 0) != 0) continue;
      auto [c, m] = parse_cell_key(k);
      entries.push_back(TableEntry{c, m, parse_rational(v)});
    }
    if (entries.empty()) fail(Errc::parse_error, spec.source + ": table law without pi[k,l] entries");
    for (const auto& e : entries) {
      if (e.probability < 0) fail(Errc::invalid_probability, "negative probability in " + spec.source);
    }
    auto law = table_law(entries, degeneracy);
    return std::move(law).with_provenance(std::nullopt, false, "table");
  }
  if (format == "independent") {
    allowed.insert({"clone", "mutant", "independent"});
    check_keys(false);
    if (auto ind = spec.find("independent"); ind && !parse_bool("independent", *ind)) {
      fail(Errc::parse_error, spec.source + ": only independent marginals are supported; use format = table "
                                            "for a dependent law");
    }
    return independent_law(parse_count_distribution(spec.require("clone")),
                           parse_count_distribution(spec.require("mutant")), tail);
  }
  if (format == "pruning") {
    allowed.insert({"base", "p"});
    check_keys(false);
    return from_pruning(parse_count_distribution(spec.require("base")), parse_rational(spec.require("p")), tail);
  }
  fail(Errc::parse_error, spec.source + ": unknown format '" + format + "' (table, independent or pruning)");
}

auto load_law(const std::string& path) -> JointOffspringLaw { return parse_law(read_key_values_file(path)); }

}  // namespace allelic
