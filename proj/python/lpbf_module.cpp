#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "lpbf/corpus.hpp"
#include "lpbf/criteria.hpp"
#include "lpbf/evaluator.hpp"
#include "lpbf/param_parser.hpp"
#include "lpbf/pipeline.hpp"
#include "lpbf/predictor.hpp"
#include "lpbf/records_io.hpp"

namespace py = pybind11;

namespace {

lpbf::Unit unit_from(const std::string& symbol) {
  auto u = lpbf::parse_unit(symbol);
  if (!u) throw lpbf::Error(lpbf::ErrorCode::UnknownUnit, "unknown unit '" + symbol + "'");
  return *u;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "L-PBF defect-regime criteria, corpus rendering, parsing and prediction";

  // args = (code, message)
  static py::handle error_type = py::exception<lpbf::Error>(m, "LpbfError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const lpbf::Error& e) {
      auto args = py::make_tuple(std::string(lpbf::to_string(e.code())), std::string(e.what()));
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  py::enum_<lpbf::UnknownPolicy>(m, "UnknownPolicy")
      .value("TreatAsNoDefect", lpbf::UnknownPolicy::TreatAsNoDefect)
      .value("Reject", lpbf::UnknownPolicy::Reject);
  py::enum_<lpbf::Verdict>(m, "Verdict")
      .value("Defect", lpbf::Verdict::Defect)
      .value("NoDefect", lpbf::Verdict::NoDefect)
      .value("Unknown", lpbf::Verdict::Unknown);
  py::enum_<lpbf::Source>(m, "Source")
      .value("ClassificationTable", lpbf::Source::ClassificationTable)
      .value("GeometryTable", lpbf::Source::GeometryTable)
      .value("Simulation", lpbf::Source::Simulation)
      .value("Augmented", lpbf::Source::Augmented);
  py::enum_<lpbf::Split>(m, "Split")
      .value("Unassigned", lpbf::Split::Unassigned)
      .value("Train", lpbf::Split::Train)
      .value("Test", lpbf::Split::Test)
      .value("Validation", lpbf::Split::Validation);

  py::class_<lpbf::CriteriaConfig>(m, "CriteriaConfig")
      .def(py::init<>())
      .def_readwrite("keyhole_ratio_threshold", &lpbf::CriteriaConfig::keyhole_ratio_threshold)
      .def_readwrite("lof_limit", &lpbf::CriteriaConfig::lof_limit)
      .def_readwrite("balling_ratio_threshold", &lpbf::CriteriaConfig::balling_ratio_threshold)
      .def_readwrite("unknown_policy", &lpbf::CriteriaConfig::unknown_policy);

  py::class_<lpbf::CriterionOutcome>(m, "CriterionOutcome")
      .def_readonly("value", &lpbf::CriterionOutcome::value)
      .def_readonly("ratio", &lpbf::CriterionOutcome::ratio);

  py::class_<lpbf::DefectLabels>(m, "DefectLabels")
      .def(py::init<>())
      .def(py::init<bool, bool, bool>(), py::arg("keyhole"), py::arg("lack_of_fusion"), py::arg("balling"))
      .def_property_readonly("keyhole", &lpbf::DefectLabels::keyhole)
      .def_property_readonly("lack_of_fusion", &lpbf::DefectLabels::lack_of_fusion)
      .def_property_readonly("balling", &lpbf::DefectLabels::balling)
      .def_property_readonly("none", &lpbf::DefectLabels::none)
      .def("to_list", &lpbf::DefectLabels::to_vector)
      .def(py::self == py::self)
      .def("__repr__", [](const lpbf::DefectLabels& l) {
        return "DefectLabels(" + lpbf::labels_json(l).dump() + ")";
      });

  py::class_<lpbf::MeltPoolDims>(m, "MeltPoolDims")
      .def(py::init([](double width, double depth, std::optional<double> length) {
             return lpbf::MeltPoolDims{width, depth, length};
           }),
           py::arg("width"), py::arg("depth"), py::arg("length") = py::none())
      .def_readwrite("width", &lpbf::MeltPoolDims::width)
      .def_readwrite("depth", &lpbf::MeltPoolDims::depth)
      .def_readwrite("length", &lpbf::MeltPoolDims::length);

  py::class_<lpbf::ProcessParameters>(m, "ProcessParameters")
      .def(py::init([](std::string material, std::optional<double> power, std::optional<double> velocity,
                       std::optional<double> beam_diameter, std::optional<double> hatch_spacing,
                       std::optional<double> layer_height) {
             return lpbf::ProcessParameters{std::move(material), power, velocity, beam_diameter,
                                            hatch_spacing, layer_height};
           }),
           py::arg("material") = "", py::arg("power") = py::none(), py::arg("velocity") = py::none(),
           py::arg("beam_diameter") = py::none(), py::arg("hatch_spacing") = py::none(),
           py::arg("layer_height") = py::none())
      .def_readwrite("material", &lpbf::ProcessParameters::material)
      .def_readwrite("power", &lpbf::ProcessParameters::power)
      .def_readwrite("velocity", &lpbf::ProcessParameters::velocity)
      .def_readwrite("beam_diameter", &lpbf::ProcessParameters::beam_diameter)
      .def_readwrite("hatch_spacing", &lpbf::ProcessParameters::hatch_spacing)
      .def_readwrite("layer_height", &lpbf::ProcessParameters::layer_height)
      .def(py::self == py::self)
      .def("__repr__", [](const lpbf::ProcessParameters& p) {
        return "ProcessParameters(" + lpbf::params_json(p).dump() + ")";
      });

  py::class_<lpbf::Record>(m, "Record")
      .def(py::init<>())
      .def_readwrite("id", &lpbf::Record::id)
      .def_readwrite("params", &lpbf::Record::params)
      .def_readwrite("dims", &lpbf::Record::dims)
      .def_readwrite("labels", &lpbf::Record::labels)
      .def_readwrite("source", &lpbf::Record::source)
      .def_readwrite("split", &lpbf::Record::split)
      .def_readwrite("group", &lpbf::Record::group)
      .def_readwrite("parent_id", &lpbf::Record::parent_id);

  py::class_<lpbf::ParseResult>(m, "ParseResult")
      .def_readonly("params", &lpbf::ParseResult::params)
      .def_readonly("unmatched_spans", &lpbf::ParseResult::unmatched_spans)
      .def_property_readonly("confidence",
                             [](const lpbf::ParseResult& r) {
                               py::dict d;
                               for (std::size_t f = 0; f < lpbf::kFieldCount; ++f) {
                                 d[py::str(std::string(lpbf::to_string(static_cast<lpbf::Field>(f))))] =
                                     std::string(lpbf::to_string(r.confidence[f]));
                               }
                               return d;
                             })
      .def("all_missing", &lpbf::ParseResult::all_missing);

  py::class_<lpbf::Prediction>(m, "Prediction")
      .def_readonly("labels", &lpbf::Prediction::labels)
      .def_property_readonly("method",
                             [](const lpbf::Prediction& p) { return std::string(lpbf::to_string(p.method)); })
      .def_readonly("neighbors", &lpbf::Prediction::neighbors)
      .def_readonly("votes", &lpbf::Prediction::votes);

  py::class_<lpbf::TrainIndex>(m, "TrainIndex")
      .def_property_readonly("size", &lpbf::TrainIndex::size)
      .def_property_readonly("mean", &lpbf::TrainIndex::mean)
      .def_property_readonly("stddev", &lpbf::TrainIndex::stddev)
      .def("to_json", &lpbf::TrainIndex::to_json)
      .def_static("from_json", [](const std::string& s) { return lpbf::TrainIndex::from_json(s); });

  py::class_<lpbf::EvalReport>(m, "EvalReport")
      .def_readonly("subset_accuracy", &lpbf::EvalReport::subset_accuracy)
      .def_readonly("hamming_loss", &lpbf::EvalReport::hamming_loss)
      .def_readonly("n_examples", &lpbf::EvalReport::n_examples)
      .def("to_json", [](const lpbf::EvalReport& r) { return lpbf::to_json(r); });

  py::class_<lpbf::PcaProjection>(m, "PcaProjection")
      .def_readonly("components", &lpbf::PcaProjection::components)
      .def_readonly("explained_variance", &lpbf::PcaProjection::explained_variance)
      .def_property_readonly("points", [](const lpbf::PcaProjection& p) {
        std::vector<std::pair<double, double>> xy;
        for (const auto& pt : p.points) xy.emplace_back(pt.x, pt.y);
        return xy;
      });

  py::class_<lpbf::PromptTemplate>(m, "PromptTemplate")
      .def_readonly("id", &lpbf::PromptTemplate::id)
      .def_readonly("text", &lpbf::PromptTemplate::text)
      .def_readonly("split", &lpbf::PromptTemplate::split);

  py::class_<lpbf::CorpusExample>(m, "CorpusExample")
      .def_readonly("text", &lpbf::CorpusExample::text)
      .def_readonly("labels", &lpbf::CorpusExample::labels)
      .def_readonly("split", &lpbf::CorpusExample::split)
      .def_readonly("record_id", &lpbf::CorpusExample::record_id)
      .def_readonly("template_id", &lpbf::CorpusExample::template_id)
      .def("to_json_line", [](const lpbf::CorpusExample& e) { return lpbf::corpus_line(e); });

  m.def("normalize_quantity",
        [](double value, const std::string& unit, const std::string& target) {
          return lpbf::normalize_quantity({value, unit_from(unit)}, unit_from(target)).value;
        },
        py::arg("value"), py::arg("unit"), py::arg("target"));
  m.def("canonicalize_material", [](const std::string& raw) { return lpbf::canonicalize_material(raw); });
  m.def("format_number", &lpbf::format_number);

  m.def("keyhole_criterion", &lpbf::keyhole_criterion, py::arg("dims"), py::arg("cfg") = lpbf::CriteriaConfig{});
  m.def("lof_criterion", &lpbf::lof_criterion, py::arg("params"), py::arg("dims"),
        py::arg("cfg") = lpbf::CriteriaConfig{});
  m.def("balling_criterion", &lpbf::balling_criterion, py::arg("dims"), py::arg("cfg") = lpbf::CriteriaConfig{});
  m.def("classify", &lpbf::classify, py::arg("params"), py::arg("dims"), py::arg("cfg") = lpbf::CriteriaConfig{});

  m.def("render_baseline", &lpbf::render_baseline);
  m.def("render_prompts", &lpbf::render_prompts);
  m.def("load_templates", &lpbf::load_templates);
  m.def("builtin_templates", &lpbf::builtin_templates);

  m.def("parse_baseline", [](const std::string& text) { return lpbf::parse_baseline(text); });
  m.def("parse_prompt", [](const std::string& text) { return lpbf::parse_prompt(text); });

  m.def("build_index", &lpbf::build_index);
  m.def("predict", &lpbf::predict, py::arg("params"), py::arg("index"), py::arg("k") = lpbf::kDefaultK);
  m.def("predict_with_dims", &lpbf::predict_with_dims, py::arg("params"), py::arg("dims"),
        py::arg("cfg") = lpbf::CriteriaConfig{});

  m.def("evaluate", &lpbf::evaluate, py::arg("predictions"), py::arg("truths"));
  m.def("pca_project",
        [](const std::vector<std::vector<double>>& features, const std::vector<lpbf::DefectLabels>& labels) {
          return lpbf::pca_project(features, labels);
        },
        py::arg("features"), py::arg("labels"));

  m.def("run_pipeline",
        [](const std::string& config, std::optional<std::string> out, std::optional<std::uint64_t> seed,
           std::optional<int> k) {
          lpbf::Pipeline pipeline(lpbf::load_config(config, {seed, k, out}));
          return pipeline.run_all();
        },
        py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("k") = py::none(),
        "Runs every stage from ingest to pca; returns the written paths.");
}
