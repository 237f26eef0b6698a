#include "allelic/cli.h"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "allelic/exact.h"
#include "allelic/forest_io.h"
#include "allelic/harness.h"
#include "allelic/law_spec.h"
#include "allelic/sampler.h"

namespace allelic {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* k_schema = "allelic/1";

struct RunConfig {
  std::string law_path;
  std::optional<KeyValues> inline_law;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "jsonl";
  std::size_t workers = 1;
  std::size_t n_max = 20;
  std::size_t k_max = 8;
  std::size_t n_trees = 0;  // 0: subcommand default
  std::size_t cap = 100'000;
  std::size_t max_size = 10;
  std::size_t structure_size = 8;
  double d = 2.0;
  std::vector<std::size_t> n_values{100, 200, 400, 800};
  double t_max = 1.0;
  std::size_t runs = 20;
  double tolerance = 0.15;
  std::vector<std::size_t> probes{250, 500, 1000, 2000};
  std::string base = "poisson 1";
  std::string clone;
  bool check_dwass = false;
  std::string fault;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

auto parse_count(const std::string& key, const std::string& v) -> std::size_t {
  auto r = parse_rational(v);
  if (r < 1 || denominator(r) != 1) throw UsageError{key + " must be a positive integer, got '" + v + "'"};
  return numerator(r).convert_to<std::size_t>();
}

auto parse_list(const std::string& key, const std::string& v) -> std::vector<std::size_t> {
  auto out = std::vector<std::size_t>{};
  auto is = std::istringstream{v};
  for (auto part = std::string{}; std::getline(is, part, ',');) {
    auto b = part.find_first_not_of(' ');
    auto e = part.find_last_not_of(' ');
    if (b == std::string::npos) throw UsageError{key + ": empty list entry"};
    out.push_back(parse_count(key, part.substr(b, e - b + 1)));
  }
  if (out.empty()) throw UsageError{key + ": empty list"};
  return out;
}

auto join_list(const std::vector<std::size_t>& v) -> std::string {
  auto s = std::string{};
  for (auto i = std::size_t{0}; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void apply_config(RunConfig& cfg, const KeyValues& kv) {
  auto dir = std::filesystem::path{kv.source}.parent_path();
  for (const auto& [key, value] : kv.entries) {
    if (key.rfind("law.", 0) == 0) continue;
    if (key == "law") {
      auto p = std::filesystem::path{value};
      cfg.law_path = p.is_absolute() ? value : (dir / p).string();
    } else if (key == "seed") {
      auto r = parse_rational(value);
      if (r < 0 || denominator(r) != 1) throw UsageError{"seed must be a nonnegative integer"};
      cfg.seed = numerator(r).convert_to<std::uint64_t>();
    } else if (key == "out") {
      cfg.out_path = value;
    } else if (key == "format") {
      cfg.format = value;
    } else if (key == "workers") {
      cfg.workers = parse_count(key, value);
    } else if (key == "n_max") {
      cfg.n_max = parse_count(key, value);
    } else if (key == "k_max") {
      cfg.k_max = parse_count(key, value);
    } else if (key == "n_trees") {
      cfg.n_trees = parse_count(key, value);
    } else if (key == "cap") {
      cfg.cap = parse_count(key, value);
    } else if (key == "max_size") {
      cfg.max_size = parse_count(key, value);
    } else if (key == "structure_size") {
      cfg.structure_size = parse_count(key, value);
    } else if (key == "d") {
      cfg.d = to_double(parse_rational(value));
    } else if (key == "n") {
      cfg.n_values = parse_list(key, value);
    } else if (key == "t_max") {
      cfg.t_max = to_double(parse_rational(value));
    } else if (key == "runs") {
      cfg.runs = parse_count(key, value);
    } else if (key == "tolerance") {
      cfg.tolerance = to_double(parse_rational(value));
    } else if (key == "probes") {
      cfg.probes = parse_list(key, value);
    } else if (key == "base") {
      cfg.base = value;
    } else if (key == "clone") {
      cfg.clone = value;
    } else {
      throw UsageError{kv.source + ": unknown config key '" + key + "'"};
    }
  }
  auto inline_law = kv.with_prefix("law.");
  if (!inline_law.entries.empty()) cfg.inline_law = std::move(inline_law);
}

auto load_configured_law(const RunConfig& cfg) -> JointOffspringLaw {
  if (!cfg.law_path.empty()) return load_law(cfg.law_path);
  if (cfg.inline_law) return parse_law(*cfg.inline_law);
  throw UsageError{"no law given: pass --law FILE or put law = FILE in the config"};
}

auto require_seed(const RunConfig& cfg, const std::string& command) -> std::uint64_t {
  if (!cfg.seed) throw UsageError{command + " is stochastic and needs --seed (or seed = N in the config)"};
  return *cfg.seed;
}

// Output sink: the --out file, or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_{&fallback} {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) fail(Errc::io_error, "cannot write '" + path + "'");
    stream_ = &file_;
  }
  auto operator*() -> std::ostream& { return *stream_; }
  auto to_file() const -> bool { return file_.is_open(); }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct Header {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;

  auto json() const -> Json {
    auto c = Json::object();
    for (const auto& [k, v] : config) c[k] = v;
    return Json{{"kind", "header"}, {"schema", k_schema}, {"command", command}, {"config", c}};
  }
  auto lines() const -> std::vector<std::string> {
    auto out = std::vector<std::string>{std::string{"schema "} + k_schema + " command " + command};
    for (const auto& [k, v] : config) out.push_back(k + " = " + v);
    return out;
  }
  void write(std::ostream& os, DumpFormat format) const {
    if (format == DumpFormat::jsonl) {
      os << json().dump() << '\n';
    } else {
      for (const auto& l : lines()) os << "# " << l << '\n';
    }
  }
};

auto law_config(const RunConfig& cfg, const JointOffspringLaw& law) -> std::vector<std::pair<std::string, std::string>> {
  auto out = std::vector<std::pair<std::string, std::string>>{};
  if (!cfg.law_path.empty()) out.emplace_back("law", cfg.law_path);
  if (cfg.inline_law) {
    for (const auto& [k, v] : cfg.inline_law->entries) out.emplace_back("law." + k, v);
  }
  out.emplace_back("law_description", law.description());
  return out;
}

auto record(const std::string& kind, Json params, double value, double residual) -> Json {
  return Json{{"kind", kind}, {"params", std::move(params)}, {"value", value}, {"residual_bound", residual}};
}

void write_records(std::ostream& os, const std::vector<Json>& records, DumpFormat format) {
  if (format == DumpFormat::jsonl) {
    for (const auto& r : records) os << r.dump() << '\n';
    return;
  }
  os << "kind,n,k,l,route,value,residual_bound\n";
  for (const auto& r : records) {
    const auto& p = r["params"];
    auto field = [&](const char* key) -> std::string {
      if (!p.contains(key)) return "";
      return p[key].is_string() ? p[key].get<std::string>() : p[key].dump();
    };
    os << r["kind"].get<std::string>() << ',' << field("n") << ',' << field("k") << ',' << field("l") << ','
       << field("route") << ',' << format_double(r["value"].get<double>()) << ','
       << format_double(r["residual_bound"].get<double>()) << '\n';
  }
}

auto cmd_exact(const RunConfig& cfg, std::ostream& out, std::ostream& err) -> int {
  auto law = load_configured_law(cfg);
  auto format = parse_dump_format(cfg.format);
  auto table = convolution_power<double>(law, cfg.n_max, formula_box(cfg.n_max));
  auto records = std::vector<Json>{};

  auto tree_residual = tree_size_residual(table);
  auto dwass = dwass_tree_size_law<double>(law, cfg.n_max);
  auto worst = 0.0;
  for (auto n = std::size_t{1}; n <= cfg.n_max; ++n) {
    auto row = 0.0;
    for (auto k = std::size_t{1}; k <= n; ++k) {
      auto v = p_tree_size_alleles(table, n, k);
      row += v;
      records.push_back(record("tree_size_alleles", Json{{"n", n}, {"k", k}}, v, 0.0));
    }
    records.push_back(record("tree_size_row_sum", Json{{"n", n}}, row, 0.0));
    records.push_back(record("dwass_tree_size", Json{{"n", n}}, dwass[n], 0.0));
    worst = std::max(worst, std::abs(row - dwass[n]));
  }
  records.push_back(record("tree_size_residual", Json::object(), tree_residual, tree_residual));
  for (auto n = std::size_t{1}; n <= cfg.n_max; ++n) {
    for (auto l = std::size_t{0}; l <= std::min(n * law.mutant_bound(), cfg.n_max - 1); ++l) {
      records.push_back(
          record("cluster_size_mutants", Json{{"n", n}, {"l", l}}, p_cluster_size_mutants(table, n, l), 0.0));
    }
  }
  auto nu = mutant_offspring_law(table);
  for (auto l = std::size_t{0}; l < nu.pmf.size(); ++l) {
    records.push_back(record("nu", Json{{"l", l}}, nu.pmf[l], nu.residual_mass));
  }
  for (auto k = std::size_t{1}; k <= cfg.k_max; ++k) {
    auto direct = p_num_alleles(table, k, AlleleRoute::direct);
    auto via_nu = p_num_alleles(table, k, AlleleRoute::dwass_on_nu);
    records.push_back(record("num_alleles", Json{{"k", k}, {"route", "direct"}}, direct.value, direct.residual_bound));
    records.push_back(
        record("num_alleles", Json{{"k", k}, {"route", "dwass_on_nu"}}, via_nu.value, via_nu.residual_bound));
  }

  auto sink = Sink{cfg.out_path, out};
  auto header = Header{"exact", law_config(cfg, law)};
  header.config.emplace_back("n_max", std::to_string(cfg.n_max));
  header.config.emplace_back("k_max", std::to_string(cfg.k_max));
  header.config.emplace_back("format", cfg.format);
  header.write(*sink, format);
  write_records(*sink, records, format);

  if (cfg.check_dwass) {
    constexpr auto tolerance = 1e-12;
    if (worst > tolerance) {
      err << "dwass check failed: max |row sum - dwass| = " << format_double(worst) << '\n';
      return k_exit_verify_failed;
    }
    err << "dwass check passed: max |row sum - dwass| = " << format_double(worst) << '\n';
  }
  return k_exit_ok;
}

auto cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) -> int {
  auto seed = require_seed(cfg, "simulate");
  auto law = load_configured_law(cfg);
  auto format = parse_dump_format(cfg.format);
  auto n_trees = cfg.n_trees == 0 ? std::size_t{10} : cfg.n_trees;
  auto forest = sample_forest(law, seed, n_trees, cfg.cap, cfg.workers);

  auto header = Header{"simulate", law_config(cfg, law)};
  header.config.emplace_back("seed", std::to_string(seed));
  header.config.emplace_back("n_trees", std::to_string(n_trees));
  header.config.emplace_back("cap", std::to_string(cfg.cap));
  header.config.emplace_back("n_max", std::to_string(cfg.n_max));
  header.config.emplace_back("format", cfg.format);

  const auto& steps = forest.sequence.steps;
  auto summary = Json{{"kind", "summary"}, {"schema", k_schema}};
  summary["trees"] = n_trees;
  summary["complete_trees"] = forest.sequence.complete_trees;
  summary["censored_trees"] = forest.censored_ids.size();
  summary["censoring_rate"] = static_cast<double>(forest.censored_ids.size()) / static_cast<double>(n_trees);
  summary["censored_ids"] = forest.censored_ids;

  if (!steps.empty()) {
    auto partition = allelic_partition(steps);
    auto tree_list = trees(steps);
    auto sum_size = 0.0;
    auto sum_alleles = 0.0;
    // Mean allele count among trees of size <= n_max, against the exact grid.
    auto hits = 0.0;
    auto sum_a = 0.0;
    auto sum_a2 = 0.0;
    for (auto i = std::size_t{0}; i < tree_list.size(); ++i) {
      auto a = static_cast<double>(partition.alleles_per_tree[i]);
      sum_size += static_cast<double>(tree_list[i].size);
      sum_alleles += a;
      if (tree_list[i].size <= cfg.n_max) {
        hits += 1.0;
        sum_a += a;
        sum_a2 += a * a;
      }
    }
    auto count = static_cast<double>(tree_list.size());
    summary["mean_tree_size"] = sum_size / count;
    summary["mean_alleles"] = sum_alleles / count;
    auto table = convolution_power<double>(law, cfg.n_max, formula_box(cfg.n_max));
    auto mass = 0.0;
    auto weighted = 0.0;
    for (auto n = std::size_t{1}; n <= cfg.n_max; ++n) {
      for (auto k = std::size_t{1}; k <= n; ++k) {
        auto p = p_tree_size_alleles(table, n, k);
        mass += p;
        weighted += static_cast<double>(k) * p;
      }
    }
    auto check = Json{{"n_max", cfg.n_max}, {"trees_used", hits}};
    if (hits > 1.0 && mass > 0.0) {
      auto mean = sum_a / hits;
      auto var = std::max(0.0, (sum_a2 - hits * mean * mean) / (hits - 1.0));
      auto se = std::sqrt(var / hits);
      auto expected = weighted / mass;
      check["observed"] = mean;
      check["expected"] = expected;
      check["standard_error"] = se;
      check["z"] = se > 0.0 ? (mean - expected) / se : 0.0;
      check["within_4se"] = se > 0.0 ? std::abs(mean - expected) <= 4.0 * se : mean == expected;
    }
    summary["mean_alleles_given_size_at_most_n_max"] = check;
  }

  auto sink = Sink{cfg.out_path, out};
  auto view = steps.empty() ? GenerationView{} : generation_view(steps);
  write_forest(*sink, view, format, header.lines());
  auto& summary_stream = sink.to_file() ? out : err;
  summary_stream << summary.dump() << '\n';
  return k_exit_ok;
}

auto parse_fault(const std::string& text) -> std::optional<SizeAlleles> {
  if (text.empty()) return std::nullopt;
  auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError{"--inject-fault expects n,k"};
  return SizeAlleles{parse_count("n", text.substr(0, comma)), parse_count("k", text.substr(comma + 1))};
}

auto cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) -> int {
  auto seed = require_seed(cfg, "verify");
  auto law = load_configured_law(cfg);
  auto format = parse_dump_format(cfg.format);
  auto n_trees = cfg.n_trees == 0 ? std::size_t{100'000} : cfg.n_trees;
  auto fault = parse_fault(cfg.fault);

  auto header = Header{"verify", law_config(cfg, law)};
  header.config.emplace_back("seed", std::to_string(seed));
  header.config.emplace_back("n_trees", std::to_string(n_trees));
  header.config.emplace_back("cap", std::to_string(cfg.cap));
  header.config.emplace_back("n_max", std::to_string(cfg.n_max));
  header.config.emplace_back("max_size", std::to_string(cfg.max_size));
  header.config.emplace_back("structure_size", std::to_string(cfg.structure_size));
  header.config.emplace_back("format", cfg.format);

  auto pass = true;
  auto exact_stage = Json{{"stage", "exact"}};
  if (law.has_exact()) {
    auto options = ExactCheckOptions{cfg.max_size, cfg.structure_size, fault};
    auto report = check_exact_formulas(law, options);
    exact_stage["status"] = report.mismatches.empty() ? "pass" : "fail";
    exact_stage["cells_checked"] = report.cells_checked;
    auto bad = Json::array();
    for (const auto& m : report.mismatches) {
      bad.push_back(Json{{"check", m.what}, {"cell", m.cell}, {"formula", m.formula}, {"enumerated", m.enumerated}});
      err << "exact mismatch: " << m.what << " at " << m.cell << ": formula " << m.formula << ", enumeration "
          << m.enumerated << '\n';
    }
    exact_stage["mismatches"] = bad;
    pass = pass && report.mismatches.empty();
  } else {
    exact_stage["status"] = "skipped";
    exact_stage["reason"] = "law has no finite exact form";
    err << "notice: enumeration stage skipped: law has no finite exact form\n";
  }

  auto counts = monte_carlo(law, MonteCarloOptions{n_trees, seed, cfg.cap, cfg.workers, 0});
  auto table = convolution_power<double>(law, cfg.n_max, formula_box(cfg.n_max));
  auto expected = std::map<std::string, double>{};
  auto observed = std::map<std::string, std::uint64_t>{};
  for (auto n = std::size_t{1}; n <= cfg.n_max; ++n) {
    for (auto k = std::size_t{1}; k <= n; ++k) {
      auto p = p_tree_size_alleles(table, n, k);
      if (p > 0.0) expected[format_cell({n, k})] = p;
    }
  }
  for (const auto& [cell, c] : counts.size_alleles) {
    if (cell.first <= cfg.n_max) observed[format_cell(cell)] += c;
  }
  auto cmp = compare(expected, observed, counts.trees);
  cmp.censoring_rate = counts.censoring_rate();
  auto stat_stage = Json{{"stage", "statistical"}, {"status", cmp.pass() ? "pass" : "fail"}};
  stat_stage["trees"] = counts.trees;
  stat_stage["censored"] = counts.censored;
  stat_stage["censoring_rate"] = cmp.censoring_rate;
  stat_stage["total_variation"] = cmp.total_variation;
  stat_stage["chi_square"] = cmp.chi_square;
  stat_stage["degrees_of_freedom"] = cmp.degrees_of_freedom;
  stat_stage["p_value"] = cmp.p_value;
  stat_stage["ks_p_value"] = cmp.ks_p_value;
  stat_stage["max_abs_z"] = cmp.max_abs_z;
  stat_stage["failures"] = cmp.failures;
  auto cells = Json::array();
  for (const auto& c : cmp.cells) {
    cells.push_back(Json{{"cell", c.key}, {"probability", c.probability}, {"observed", c.observed},
                         {"expected", c.expected}, {"z", std::isfinite(c.z) ? Json(c.z) : Json("inf")}});
  }
  stat_stage["cells"] = cells;
  for (const auto& f : cmp.failures) err << "statistical failure: " << f << '\n';
  pass = pass && cmp.pass();

  auto sink = Sink{cfg.out_path, out};
  header.write(*sink, format);
  if (format == DumpFormat::jsonl) {
    *sink << exact_stage.dump() << '\n' << stat_stage.dump() << '\n';
    *sink << Json{{"kind", "verdict"}, {"pass", pass}}.dump() << '\n';
  } else {
    *sink << "# exact " << exact_stage["status"].get<std::string>() << '\n';
    *sink << "# statistical " << stat_stage["status"].get<std::string>() << " p=" << format_double(cmp.p_value)
          << " tv=" << format_double(cmp.total_variation) << '\n';
    *sink << "cell,probability,observed,expected,z\n";
    for (const auto& c : cmp.cells) {
      *sink << c.key << ',' << format_double(c.probability) << ',' << c.observed << ',' << format_double(c.expected)
            << ',' << format_double(c.z) << '\n';
    }
    *sink << "# verdict " << (pass ? "pass" : "fail") << '\n';
  }
  return pass ? k_exit_ok : k_exit_verify_failed;
}

auto cmd_scaling(const RunConfig& cfg, std::ostream& out, std::ostream&) -> int {
  auto seed = require_seed(cfg, "scaling");
  auto format = parse_dump_format(cfg.format);
  auto base = parse_count_distribution(cfg.base);

  auto header = Header{"scaling", {}};
  auto clone = std::optional<CountDistribution>{};
  if (!cfg.clone.empty()) {
    clone = parse_count_distribution(cfg.clone);
    header.config.emplace_back("clone", clone->describe());
  } else if (!cfg.law_path.empty() || cfg.inline_law) {
    auto law = load_configured_law(cfg);
    header.config = law_config(cfg, law);
    clone = clone_marginal(law);
  } else {
    clone = CountDistribution::geometric(Rational{1, 3});
    header.config.emplace_back("clone", clone->describe());
  }
  header.config.emplace_back("seed", std::to_string(seed));
  header.config.emplace_back("base", base.describe());
  header.config.emplace_back("d", format_double(cfg.d));
  header.config.emplace_back("n", join_list(cfg.n_values));
  header.config.emplace_back("t_max", format_double(cfg.t_max));
  header.config.emplace_back("runs", std::to_string(cfg.runs));
  header.config.emplace_back("tolerance", format_double(cfg.tolerance));
  header.config.emplace_back("probes", join_list(cfg.probes));
  header.config.emplace_back("format", cfg.format);

  auto rows = std::vector<Json>{};
  for (auto n : cfg.n_values) {
    auto devs = std::vector<double>(cfg.runs);
    parallel_blocks(cfg.runs, cfg.workers, [&](std::size_t begin, std::size_t end, std::size_t) {
      for (auto r = begin; r < end; ++r) devs[r] = drift_probe(base, cfg.d, n, cfg.t_max, seed + r).sup_deviation;
    });
    auto mean = 0.0;
    for (auto v : devs) mean += v;
    mean /= static_cast<double>(devs.size());
    auto var = 0.0;
    auto below = 0.0;
    for (auto v : devs) {
      var += (v - mean) * (v - mean);
      if (v < cfg.tolerance) below += 1.0;
    }
    var = devs.size() > 1 ? var / static_cast<double>(devs.size() - 1) : 0.0;
    rows.push_back(Json{{"kind", "drift"},
                        {"params", Json{{"n", n}, {"d", cfg.d}, {"t_max", cfg.t_max}, {"runs", cfg.runs}}},
                        {"mean_sup_deviation", mean},
                        {"variance_sup_deviation", var},
                        {"fraction_below_tolerance", below / static_cast<double>(devs.size())}});
  }
  auto asym = tilted_cluster_asymptotic(*clone, cfg.probes);
  for (const auto& row : asym.rows) {
    rows.push_back(Json{{"kind", "tilted_cluster"},
                        {"params", Json{{"n", row.n}}},
                        {"theta", asym.theta},
                        {"sigma_sq", asym.sigma_sq},
                        {"scaled", row.scaled},
                        {"limit", asym.limit},
                        {"ratio", row.ratio},
                        {"periodic", asym.periodic}});
  }

  auto sink = Sink{cfg.out_path, out};
  header.write(*sink, format);
  if (format == DumpFormat::jsonl) {
    for (const auto& r : rows) *sink << r.dump() << '\n';
  } else {
    *sink << "kind,n,mean_sup_deviation,variance_sup_deviation,fraction_below_tolerance,scaled,limit,ratio\n";
    for (const auto& r : rows) {
      auto get = [&](const char* key) { return r.contains(key) ? format_double(r[key].get<double>()) : ""; };
      *sink << r["kind"].get<std::string>() << ',' << r["params"]["n"].dump() << ',' << get("mean_sup_deviation")
            << ',' << get("variance_sup_deviation") << ',' << get("fraction_below_tolerance") << ','
            << get("scaled") << ',' << get("limit") << ',' << get("ratio") << '\n';
    }
  }
  return k_exit_ok;
}

// Pulls --config out before the real parse so its values become defaults
// that explicit flags override.
auto find_config_path(const std::vector<std::string>& args) -> std::optional<std::string> {
  for (auto i = std::size_t{1}; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

auto run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) -> int {
  auto cfg = RunConfig{};
  try {
    if (auto path = find_config_path(args)) apply_config(cfg, read_key_values_file(*path));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return k_exit_usage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return k_exit_usage;
  }

  auto app = CLI::App{"Galton-Watson forests with neutral mutations: simulation, exact allelic-partition laws, "
                      "and cross-validation.",
                      "allelic"};
  app.require_subcommand(1);
  app.fallthrough();
  auto config_path = std::string{};
  auto law_path = cfg.law_path;
  auto seed = std::optional<std::uint64_t>{};
  app.add_option("--config", config_path, "key = value run configuration; flags override it");
  app.add_option("--law", law_path, "law file (format = table | independent | pruning)");
  app.add_option("--seed", seed, "RNG seed; required by simulate, verify and scaling");
  app.add_option("--out", cfg.out_path, "output file (default: standard output)");
  app.add_option("--format", cfg.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--workers", cfg.workers, "worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);

  auto* exact = app.add_subcommand(
      "exact",
      "Exact laws from convolution powers of pi:\n"
      "  P(T = n, A = k) = pi^{*n}_{n-k,k-1} / n\n"
      "  P(|C_1| = n, M_1 = l) = pi^{*n}_{n-1,l} / n\n"
      "  nu_l = sum_n pi^{*n}_{n-1,l} / n\n"
      "  P(A = k) = sum_n pi^{*n}_{n-k,k-1} / n = nu^{*k}_{k-1} / k, with residual bounds");
  exact->add_option("--n-max", cfg.n_max, "largest convolution power")->check(CLI::PositiveNumber);
  exact->add_option("--k-max", cfg.k_max, "largest allele count for P(A = k)")->check(CLI::PositiveNumber);
  exact->add_flag("--check-dwass", cfg.check_dwass,
                  "exit 1 unless each grid row sum equals P(xi+_1 + ... + xi+_n = n - 1) / n");

  auto* simulate = app.add_subcommand(
      "simulate", "Sample i.i.d. trees in DFS-with-mutations order and dump one record per individual\n"
                  "(i,c,m,tree,cluster,generation,label); the summary compares the mean allele count\n"
                  "with sum_k k P(T = n, A = k) over n <= n_max");
  simulate->add_option("--n-trees", cfg.n_trees, "number of trees")->check(CLI::PositiveNumber);
  simulate->add_option("--cap", cfg.cap, "per-tree individual cap (larger trees are censored)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--n-max", cfg.n_max, "largest tree size in the exact comparison")
      ->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand(
      "verify", "Enumeration against every exact formula (rational arithmetic), then Monte Carlo counts\n"
                "of (T, A) against pi^{*n}_{n-k,k-1} / n with a pooled chi-square test and per-cell z-scores");
  verify->add_option("--n-trees", cfg.n_trees, "Monte Carlo trees")->check(CLI::PositiveNumber);
  verify->add_option("--cap", cfg.cap, "per-tree individual cap")->check(CLI::PositiveNumber);
  verify->add_option("--n-max", cfg.n_max, "largest tree size in the statistical grid")->check(CLI::PositiveNumber);
  verify->add_option("--max-size", cfg.max_size, "largest tree / Eve cluster size enumerated")
      ->check(CLI::PositiveNumber);
  verify->add_option("--structure-size", cfg.structure_size,
                     "largest tree size for full cluster sequences and the cyclic size law")
      ->check(CLI::PositiveNumber);
  verify->add_option("--inject-fault", cfg.fault)->group("");

  auto* scaling = app.add_subcommand(
      "scaling", "Drift of n^{-1}(S+ - S^c) at [t n^2] against d t under pruning with p = d / n, and\n"
                 "n^{3/2} P~(|C_1| = n) against 1 / sqrt(2 pi sigma^2) under the tilted clone law");
  auto n_list = join_list(cfg.n_values);
  auto probe_list = join_list(cfg.probes);
  scaling->add_option("--d", cfg.d, "mutation intensity d >= 0")->check(CLI::NonNegativeNumber);
  scaling->add_option("--n", n_list, "comma-separated n values for the drift probe");
  scaling->add_option("--t-max", cfg.t_max, "time horizon")->check(CLI::PositiveNumber);
  scaling->add_option("--runs", cfg.runs, "seeded runs per n")->check(CLI::PositiveNumber);
  scaling->add_option("--tolerance", cfg.tolerance, "sup-deviation threshold")->check(CLI::PositiveNumber);
  scaling->add_option("--probes", probe_list, "comma-separated cluster sizes for the tilted asymptotic");
  scaling->add_option("--base", cfg.base, "base offspring family for pruning, e.g. \"poisson 1\"");
  scaling->add_option("--clone", cfg.clone, "clone family to tilt (default: the law's clone marginal)");

  auto argv = std::vector<const char*>{};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return k_exit_ok;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return k_exit_ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return k_exit_usage;
  }

  try {
    cfg.law_path = law_path;
    if (seed) cfg.seed = seed;
    cfg.n_values = parse_list("--n", n_list);
    cfg.probes = parse_list("--probes", probe_list);
    if (exact->parsed()) return cmd_exact(cfg, out, err);
    if (simulate->parsed()) return cmd_simulate(cfg, out, err);
    if (verify->parsed()) return cmd_verify(cfg, out, err);
    return cmd_scaling(cfg, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  }
  return k_exit_usage;
}

}  // namespace allelic
