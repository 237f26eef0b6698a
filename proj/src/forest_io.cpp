#include "allelic/forest_io.h"

#include <algorithm>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

namespace allelic {

auto parse_dump_format(const std::string& text) -> DumpFormat {
  if (text == "csv") return DumpFormat::csv;
  if (text == "jsonl") return DumpFormat::jsonl;
  fail(Errc::parse_error, "unknown format '" + text + "' (csv or jsonl)");
}

void write_forest(std::ostream& out, const GenerationView& view, DumpFormat format,
                  const std::vector<std::string>& provenance) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  if (format == DumpFormat::csv) {
    out << "i,c,m,tree,cluster,generation,label\n";
    for (const auto& r : view.records) {
      out << r.index << ',' << r.xi.clones << ',' << r.xi.mutants << ',' << r.tree << ',' << r.cluster << ','
          << r.generation << ',' << format_label(r.label) << '\n';
    }
    return;
  }
  for (const auto& r : view.records) {
    auto j = nlohmann::ordered_json{{"i", r.index},          {"c", r.xi.clones},
                                    {"m", r.xi.mutants},     {"tree", r.tree},
                                    {"cluster", r.cluster},  {"generation", r.generation},
                                    {"label", format_label(r.label)}};
    out << j.dump() << '\n';
  }
}

namespace {

auto parse_count(const std::string& field, std::size_t line) -> std::size_t {
  try {
    auto pos = std::size_t{0};
    auto v = std::stoull(field, &pos);
    if (pos == field.size()) return v;
  } catch (const std::logic_error&) {
  }
  fail(Errc::parse_error, "line " + std::to_string(line) + ": '" + field + "' is not a count");
}

}  // namespace

auto read_forest(std::istream& in, DumpFormat format) -> LoadedForest {
  auto loaded = LoadedForest{};
  auto records = std::vector<IndividualRecord>{};
  auto line_no = std::size_t{0};
  auto header_seen = format == DumpFormat::jsonl;
  for (auto line = std::string{}; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      loaded.provenance.push_back(line.size() > 2 ? line.substr(2) : std::string{});
      continue;
    }
    if (!header_seen) {
      if (line != "i,c,m,tree,cluster,generation,label") {
        fail(Errc::parse_error, "line " + std::to_string(line_no) + ": unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    auto r = IndividualRecord{};
    if (format == DumpFormat::csv) {
      auto fields = std::vector<std::string>{};
      auto is = std::istringstream{line};
      for (auto f = std::string{}; std::getline(is, f, ',');) fields.push_back(f);
      if (fields.size() != 7) fail(Errc::parse_error, "line " + std::to_string(line_no) + ": expected 7 fields");
      r.index = parse_count(fields[0], line_no);
      r.xi.clones = static_cast<std::uint32_t>(parse_count(fields[1], line_no));
      r.xi.mutants = static_cast<std::uint32_t>(parse_count(fields[2], line_no));
      r.tree = parse_count(fields[3], line_no);
      r.cluster = parse_count(fields[4], line_no);
      r.generation = parse_count(fields[5], line_no);
      r.label = parse_label(fields[6]);
    } else {
      try {
        auto j = nlohmann::json::parse(line);
        r.index = j.at("i").get<std::size_t>();
        r.xi.clones = j.at("c").get<std::uint32_t>();
        r.xi.mutants = j.at("m").get<std::uint32_t>();
        r.tree = j.at("tree").get<std::size_t>();
        r.cluster = j.at("cluster").get<std::size_t>();
        r.generation = j.at("generation").get<std::size_t>();
        r.label = parse_label(j.at("label").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    records.push_back(std::move(r));
  }
  std::sort(records.begin(), records.end(),
            [](const IndividualRecord& x, const IndividualRecord& y) { return x.index < y.index; });
  for (auto i = std::size_t{0}; i < records.size(); ++i) {
    if (records[i].index != i) fail(Errc::parse_error, "record indices are not 0.." + std::to_string(records.size() - 1));
    loaded.sequence.steps.push_back(records[i].xi);
  }
  if (records.empty()) return loaded;

  auto view = generation_view(loaded.sequence.steps);
  for (auto i = std::size_t{0}; i < records.size(); ++i) {
    const auto& want = view.records[i];
    const auto& got = records[i];
    if (got.tree != want.tree || got.cluster != want.cluster || got.generation != want.generation ||
        got.label != want.label) {
      fail(Errc::parse_error, "record " + std::to_string(i) + " disagrees with the walk it encodes");
    }
  }
  loaded.sequence.complete_trees = tree_boundaries(loaded.sequence.steps).size();
  loaded.records = std::move(view.records);
  return loaded;
}

}  // namespace allelic
