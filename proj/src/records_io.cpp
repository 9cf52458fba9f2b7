#include "lpbf/records_io.hpp"

#include <fstream>

namespace lpbf {

namespace {

using ojson = nlohmann::ordered_json;

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(); }

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

ojson to_json(const ProcessParameters& p) {
  ojson j;
  j["material"] = p.material;
  j["power"] = optional_number(p.power);
  j["velocity"] = optional_number(p.velocity);
  j["beam_diameter"] = optional_number(p.beam_diameter);
  j["hatch_spacing"] = optional_number(p.hatch_spacing);
  j["layer_height"] = optional_number(p.layer_height);
  return j;
}

ojson to_json(const Record& r) {
  ojson j;
  j["id"] = r.id;
  j["group"] = r.group;
  j["source"] = std::string(to_string(r.source));
  j["split"] = std::string(to_string(r.split));
  j["params"] = to_json(r.params);
  if (r.dims) {
    j["dims"] = {{"width", r.dims->width}, {"depth", r.dims->depth},
                 {"length", optional_number(r.dims->length)}};
  } else {
    j["dims"] = nullptr;
  }
  if (r.labels) {
    ojson labels = ojson::array();
    for (bool b : r.labels->to_vector()) labels.push_back(b ? 1 : 0);
    j["labels"] = labels;
  } else {
    j["labels"] = nullptr;
  }
  j["parent_id"] = r.parent_id ? ojson(*r.parent_id) : ojson();
  return j;
}

Record record_from_json(const nlohmann::json& j) {
  Record r;
  r.id = j.at("id").get<std::string>();
  r.group = j.at("group").get<std::string>();
  r.source = parse_source(j.at("source").get<std::string>());
  r.split = parse_split(j.at("split").get<std::string>());
  const auto& p = j.at("params");
  r.params.material = p.at("material").get<std::string>();
  r.params.power = read_optional(p, "power");
  r.params.velocity = read_optional(p, "velocity");
  r.params.beam_diameter = read_optional(p, "beam_diameter");
  r.params.hatch_spacing = read_optional(p, "hatch_spacing");
  r.params.layer_height = read_optional(p, "layer_height");
  if (!j.at("dims").is_null()) {
    const auto& d = j["dims"];
    r.dims = MeltPoolDims{d.at("width").get<double>(), d.at("depth").get<double>(),
                          read_optional(d, "length")};
  }
  if (!j.at("labels").is_null()) {
    std::array<bool, DefectLabels::kCount> v{};
    for (std::size_t i = 0; i < DefectLabels::kCount; ++i) v[i] = j["labels"].at(i).get<int>() != 0;
    r.labels = DefectLabels::from_vector(v);
  }
  if (j.contains("parent_id") && !j["parent_id"].is_null()) {
    r.parent_id = j["parent_id"].get<std::string>();
  }
  return r;
}

void write_records(const std::vector<Record>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::vector<Record> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + path);
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::IoError, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

ojson labels_json(const DefectLabels& labels) {
  return {{"keyhole", labels.keyhole()},
          {"lack_of_fusion", labels.lack_of_fusion()},
          {"balling", labels.balling()},
          {"none", labels.none()}};
}

ojson params_json(const ProcessParameters& p) {
  ojson j;
  j["material"] = p.material.empty() ? ojson() : ojson(p.material);
  j["power_w"] = optional_number(p.power);
  j["velocity_mm_s"] = optional_number(p.velocity);
  j["beam_diameter_um"] = optional_number(p.beam_diameter);
  j["hatch_spacing_um"] = optional_number(p.hatch_spacing);
  j["layer_height_um"] = optional_number(p.layer_height);
  return j;
}

ojson to_json(const ParseResult& r) {
  ojson j;
  j["params"] = params_json(r.params);
  ojson confidence;
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    confidence[std::string(to_string(static_cast<Field>(f)))] = std::string(to_string(r.confidence[f]));
  }
  j["confidence"] = confidence;
  j["unmatched_spans"] = ojson::array();
  for (const auto& [offset, text] : r.unmatched_spans) {
    j["unmatched_spans"].push_back({{"offset", offset}, {"text", text}});
  }
  return j;
}

ojson to_json(const Prediction& p) {
  ojson j;
  j["labels"] = labels_json(p.labels);
  j["method"] = std::string(to_string(p.method));
  j["neighbors"] = ojson::array();
  for (const auto& [id, distance] : p.neighbors) {
    j["neighbors"].push_back({{"id", id}, {"distance", distance}});
  }
  if (p.votes) {
    ojson votes;
    for (std::size_t l = 0; l < DefectLabels::kCount; ++l) {
      votes[std::string(DefectLabels::kNames[l])] = (*p.votes)[l];
    }
    j["votes"] = votes;
  }
  return j;
}

}  // namespace lpbf
