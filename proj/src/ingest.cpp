#include "lpbf/ingest.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace lpbf {

namespace {

constexpr std::array<std::string_view, 11> kFields = {
    "material", "power",  "velocity", "beam_diameter", "hatch_spacing",
    "layer_height", "width", "depth", "length", "label", "id"};

std::optional<Dimension> field_dimension(std::string_view field) {
  if (field == "power") return Dimension::Power;
  if (field == "velocity") return Dimension::Speed;
  if (field == "beam_diameter" || field == "hatch_spacing" ||
      field == "layer_height" || field == "width" || field == "depth" ||
      field == "length") {
    return Dimension::Length;
  }
  return std::nullopt;
}

struct RowError {
  std::string reason;
};

}  // namespace

void validate(const SourceSchema& schema) {
  for (const auto& [field, column] : schema.column_map) {
    if (std::find(kFields.begin(), kFields.end(), field) == kFields.end()) {
      throw Error(ErrorCode::InvalidConfig, "schema maps unknown field '" + field + "'");
    }
    if (column.empty()) {
      throw Error(ErrorCode::InvalidConfig, "schema field '" + field + "' has empty column name");
    }
  }
  for (const auto& [field, unit] : schema.unit_map) {
    auto dim = field_dimension(field);
    if (!dim || dimension_of(unit) != *dim) {
      throw Error(ErrorCode::InvalidConfig,
                  "unit '" + std::string(unit_symbol(unit)) + "' does not fit field '" + field + "'");
    }
  }
  std::vector<std::string_view> required = {"material", "power", "velocity"};
  if (schema.kind == TableKind::ClassificationTable) {
    required.push_back("label");
  } else {
    required.push_back("width");
    required.push_back("depth");
  }
  for (auto field : required) {
    if (!schema.column_map.contains(std::string(field))) {
      throw Error(ErrorCode::InvalidConfig,
                  "schema is missing required field '" + std::string(field) + "'");
    }
  }
}

std::vector<std::vector<std::string>> parse_delimited(std::string_view text,
                                                      char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool row_has_content = false;
  auto end_row = [&] {
    if (row_has_content || !row.empty()) {
      row.push_back(std::move(cell));
      rows.push_back(std::move(row));
    }
    row.clear();
    cell.clear();
    row_has_content = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      row_has_content = true;
    } else if (c == delimiter) {
      row.push_back(std::move(cell));
      cell.clear();
      row_has_content = true;
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // CRLF
    } else {
      cell.push_back(c);
      row_has_content = true;
    }
  }
  end_row();
  return rows;
}

std::optional<std::size_t> label_token_index(std::string_view token) {
  std::string key;
  for (char c : to_lower(trim(token))) {
    if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(c);
  }
  static const std::pair<std::string_view, std::size_t> kTokens[] = {
      {"keyhole", 0},      {"keyholing", 0},    {"kh", 0},
      {"lackoffusion", 1}, {"lof", 1},          {"lackfusion", 1},
      {"balling", 2},      {"ball", 2},
      {"none", 3},         {"desirable", 3},    {"nodefect", 3},
      {"conduction", 3},
  };
  for (const auto& [name, index] : kTokens) {
    if (key == name) return index;
  }
  return std::nullopt;
}

DefectLabels parse_label_cell(std::string_view cell) {
  std::array<bool, DefectLabels::kCount> flags{};
  std::size_t start = 0;
  bool any = false;
  while (start <= cell.size()) {
    std::size_t stop = cell.find_first_of("+;|", start);
    if (stop == std::string_view::npos) stop = cell.size();
    std::string_view token = trim(cell.substr(start, stop - start));
    start = stop + 1;
    if (token.empty()) continue;
    auto index = label_token_index(token);
    if (!index) {
      throw Error(ErrorCode::InvalidParameters, "unknown label token '" + std::string(token) + "'");
    }
    flags[*index] = true;
    any = true;
  }
  if (!any) throw Error(ErrorCode::MissingLabels, "empty label cell");
  bool defect = flags[0] || flags[1] || flags[2];
  if (defect && flags[3]) {
    throw Error(ErrorCode::MissingLabels, "label cell combines 'none' with a defect");
  }
  return DefectLabels(flags[0], flags[1], flags[2]);
}

IngestResult ingest_text(std::string_view text, const SourceSchema& schema,
                         const MaterialTable& materials) {
  validate(schema);
  auto rows = parse_delimited(text, schema.delimiter);
  if (rows.empty()) {
    throw Error(ErrorCode::HeaderMismatch, "table '" + schema.name + "' has no header row");
  }
  const auto& header = rows.front();
  std::map<std::string, std::size_t> column_index;
  for (const auto& [field, column] : schema.column_map) {
    std::size_t pos = 0;
    for (; pos < header.size(); ++pos) {
      if (trim(header[pos]) == column) break;
    }
    if (pos == header.size()) {
      throw Error(ErrorCode::HeaderMismatch,
                  "table '" + schema.name + "' lacks column '" + column + "'");
    }
    column_index[field] = pos;
  }

  Source source = schema.record_source.value_or(
      schema.kind == TableKind::ClassificationTable ? Source::ClassificationTable
                                                    : Source::GeometryTable);

  IngestResult result;
  // Widest index width keeps ids sortable in row order.
  int width = static_cast<int>(std::to_string(rows.size()).size());
  std::set<std::string> seen_ids;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::size_t row_index = r - 1;
    const auto& row = rows[r];
    ++result.report.rows_read;
    try {
      auto cell = [&](const std::string& field) -> std::optional<std::string_view> {
        auto it = column_index.find(field);
        if (it == column_index.end()) return std::nullopt;
        if (it->second >= row.size()) {
          throw RowError{"row has " + std::to_string(row.size()) + " cells, expected column '" +
                         schema.column_map.at(field) + "'"};
        }
        std::string_view v = trim(row[it->second]);
        if (v.empty()) return std::nullopt;
        return v;
      };
      auto number = [&](const std::string& field, bool required) -> std::optional<double> {
        auto raw = cell(field);
        if (!raw) {
          if (required) throw RowError{"MissingValue: " + field};
          return std::nullopt;
        }
        auto v = parse_number(*raw);
        if (!v) throw RowError{"MalformedNumber: " + field + " = '" + std::string(*raw) + "'"};
        auto unit_it = schema.unit_map.find(field);
        Unit unit = unit_it != schema.unit_map.end()
                        ? unit_it->second
                        : canonical_unit(*field_dimension(field));
        return normalize_quantity({*v, unit}, canonical_unit(*field_dimension(field))).value;
      };

      Record rec;
      rec.source = source;
      rec.group = schema.name;
      if (auto id = cell("id")) {
        rec.id = schema.name + ":" + std::string(*id);
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%0*zu", width, row_index);
        rec.id = schema.name + ":" + buf;
      }
      if (!seen_ids.insert(rec.id).second) throw RowError{"DuplicateId: " + rec.id};

      auto material = cell("material");
      if (!material) throw RowError{"EmptyMaterial"};
      rec.params.material = materials.canonicalize(*material);
      rec.params.power = number("power", true);
      rec.params.velocity = number("velocity", true);
      rec.params.beam_diameter = number("beam_diameter", false);
      rec.params.hatch_spacing = number("hatch_spacing", false);
      rec.params.layer_height = number("layer_height", false);
      validate(rec.params);

      if (schema.kind == TableKind::GeometryTable) {
        MeltPoolDims dims;
        dims.width = *number("width", true);
        dims.depth = *number("depth", true);
        dims.length = number("length", false);
        validate(dims);
        rec.dims = dims;
      } else {
        auto label = cell("label");
        if (!label) throw RowError{"MissingLabels"};
        rec.labels = parse_label_cell(*label);
        if (column_index.contains("width") && column_index.contains("depth")) {
          auto w = number("width", false);
          auto d = number("depth", false);
          if (w && d) {
            MeltPoolDims dims{*w, *d, number("length", false)};
            validate(dims);
            rec.dims = dims;
          }
        }
      }
      result.records.push_back(std::move(rec));
      ++result.report.rows_accepted;
    } catch (const RowError& e) {
      ++result.report.rows_rejected;
      result.report.rejection_reasons.emplace_back(row_index, e.reason);
    } catch (const Error& e) {
      ++result.report.rows_rejected;
      result.report.rejection_reasons.emplace_back(
          row_index, std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  return result;
}

IngestResult ingest_table(const std::string& path, const SourceSchema& schema,
                          const MaterialTable& materials) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  SourceSchema named = schema;
  if (named.name.empty()) named.name = std::filesystem::path(path).stem().string();
  return ingest_text(buf.str(), named, materials);
}

std::vector<Record> label_geometry_records(std::vector<Record> records,
                                           const CriteriaConfig& cfg) {
  for (auto& rec : records) {
    if (rec.labels) continue;
    if (!rec.dims) {
      throw Error(ErrorCode::MissingDims, "record " + rec.id + " has neither labels nor dims");
    }
    try {
      rec.labels = classify(rec.params, *rec.dims, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "record " + rec.id + ": " + e.what());
    }
  }
  return records;
}

}  // namespace lpbf
