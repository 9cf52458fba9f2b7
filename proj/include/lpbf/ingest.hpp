#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lpbf/core.hpp"
#include "lpbf/criteria.hpp"

namespace lpbf {

enum class TableKind { ClassificationTable, GeometryTable };

// Canonical field names a schema may map: material, power, velocity,
// beam_diameter, hatch_spacing, layer_height, width, depth, length, label, id.
struct SourceSchema {
  TableKind kind = TableKind::GeometryTable;
  std::string name;  // group key and id prefix; defaults to the file stem
  std::map<std::string, std::string> column_map;  // canonical -> source column
  std::map<std::string, Unit> unit_map;           // canonical -> source unit
  char delimiter = ',';
  // Record source tag; GeometryTable schemas may mark simulation exports.
  std::optional<Source> record_source;
};

// Throws InvalidConfig on unknown field names, wrong-dimension units, or a
// missing required mapping.
void validate(const SourceSchema& schema);

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;
  std::vector<std::pair<std::size_t, std::string>> rejection_reasons;
};

struct IngestResult {
  std::vector<Record> records;
  IngestReport report;
};

// Splits delimiter-separated text into rows; double quotes escape the
// delimiter, newlines and `""`.
std::vector<std::vector<std::string>> parse_delimited(std::string_view text,
                                                      char delimiter);

// Maps a case-insensitive label token ("keyhole", "LOF", "desirable", ...)
// to its flag index in DefectLabels order. Cells may hold several tokens
// joined by '+', ';' or '|'.
std::optional<std::size_t> label_token_index(std::string_view token);
DefectLabels parse_label_cell(std::string_view cell);

IngestResult ingest_table(const std::string& path, const SourceSchema& schema,
                          const MaterialTable& materials = MaterialTable::builtin());

// Same, over in-memory text.
IngestResult ingest_text(std::string_view text, const SourceSchema& schema,
                         const MaterialTable& materials = MaterialTable::builtin());

// Fills labels from the melt pool criteria; already-labeled records pass
// through unchanged.
std::vector<Record> label_geometry_records(std::vector<Record> records,
                                           const CriteriaConfig& cfg);

}  // namespace lpbf
