#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "allelic/forest.h"

namespace allelic {

enum class DumpFormat { csv, jsonl };

auto parse_dump_format(const std::string& text) -> DumpFormat;

// One record per individual, columns i,c,m,tree,cluster,generation,label, with
// the label written a:m:s1.s2... ; provenance lines are prefixed with '#'.
void write_forest(std::ostream& out, const GenerationView& view, DumpFormat format,
                  const std::vector<std::string>& provenance = {});

struct LoadedForest {
  DfsSequence sequence;
  std::vector<IndividualRecord> records;
  std::vector<std::string> provenance;
};

// Reads a dump back and checks every derived column against the steps.
auto read_forest(std::istream& in, DumpFormat format) -> LoadedForest;

}  // namespace allelic
