#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lacksim/config.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace lacksim;

namespace {

py::dict summary_dict(const BatchSummary& s) {
  py::dict d;
  d["calls"] = s.calls;
  d["mean_duration"] = s.mean_duration;
  d["stddev_duration"] = s.stddev_duration;
  d["model_mean_duration"] = s.model_mean_duration;
  d["completion_fraction"] = s.completion_fraction;
  d["loss_violations"] = s.loss_violations;
  d["covert_throughput"] = s.covert_throughput;
  d["covert_bits_sent"] = s.covert_bits_sent;
  d["covert_bits_delivered"] = s.covert_bits_delivered;
  d["mean_induced_loss"] = s.mean_induced_loss;
  d["mean_total_discard"] = s.mean_total_discard;
  d["false_covert_reads"] = s.false_covert_reads;
  return d;
}

ExperimentConfig config_from(const std::string& text_or_preset) {
  for (const auto& name : preset_names()) {
    if (name == text_or_preset) return preset(name);
  }
  return parse_config(text_or_preset);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LACK VoIP steganography: call-duration models, insertion-rate scheduling, "
            "and channel simulation";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<TailUnderflowError>(m, "TailUnderflowError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<SequencingError>(m, "SequencingError", PyExc_RuntimeError);

  py::class_<ModelMoments>(m, "ModelMoments")
      .def_readonly("mean", &ModelMoments::mean)
      .def_readonly("std_dev", &ModelMoments::std_dev)
      .def_readonly("cv", &ModelMoments::cv)
      .def_readonly("second_moment", &ModelMoments::second_moment)
      .def_static("from_mean_cv", &ModelMoments::from_mean_cv, "mean"_a, "cv"_a);

  py::class_<DurationModel>(m, "DurationModel")
      .def_static("weibull", &DurationModel::weibull, "k"_a, "lam"_a)
      .def_static("exponential", &DurationModel::exponential, "mean"_a)
      .def_static("empirical", &DurationModel::empirical)
      .def("pdf", &DurationModel::pdf, "x"_a)
      .def("ccdf", &DurationModel::ccdf, "x"_a)
      .def("cdf", &DurationModel::cdf, "x"_a)
      .def("moments", &DurationModel::moments)
      .def("sample", py::overload_cast<std::uint64_t>(&DurationModel::sample, py::const_),
           "seed"_a)
      .def("sample_at", &DurationModel::sample_at, "u"_a)
      .def_property_readonly("label", &DurationModel::label)
      .def("__repr__", [](const DurationModel& d) { return "<DurationModel " + d.label() + ">"; });

  m.def("table1", [] {
    py::list out;
    for (const auto& e : table1()) out.append(py::make_tuple(e.shape, e.scale, e.printed_cv));
    return out;
  });

  m.def("mean_residual", &mean_residual, "moments"_a);
  m.def("mean_residual_from_cv", &mean_residual_from_cv, "mean"_a, "cv"_a);
  m.def("conditional_mean", &conditional_mean, "model"_a, "t"_a);
  m.def("conditional_mean_by_quadrature", &conditional_mean_by_quadrature, "model"_a, "t"_a);
  m.def("conditional_mean_bounds", [](const DurationModel& model, double t) {
    auto b = conditional_mean_bounds(model, t);
    return py::make_tuple(b.lower, b.upper);
  }, "model"_a, "t"_a);
  m.def("largest_valid_time", &largest_valid_time, "model"_a);

  py::class_<ApproxCoefficients>(m, "ApproxCoefficients")
      .def_static("as_printed", &ApproxCoefficients::as_printed)
      .def_readonly("a", &ApproxCoefficients::a)
      .def_readonly("b", &ApproxCoefficients::b)
      .def_readonly("c", &ApproxCoefficients::c)
      .def_readonly("fit_residual", &ApproxCoefficients::fit_residual);
  m.def("approx_conditional_mean", &approx_conditional_mean, "coeffs"_a, "cv"_a, "t"_a);
  m.def("refit_approximation", &refit_approximation, "model"_a, "t_max"_a = 300.0,
        "grid_points"_a = 64);

  py::class_<CodecProfile>(m, "CodecProfile")
      .def_readonly("name", &CodecProfile::name)
      .def_readonly("bit_rate", &CodecProfile::bit_rate)
      .def_readonly("frame_interval", &CodecProfile::frame_interval)
      .def_readonly("payload_bits", &CodecProfile::payload_bits)
      .def_readonly("loss_tolerance", &CodecProfile::loss_tolerance)
      .def_readonly("loss_tolerance_plc", &CodecProfile::loss_tolerance_plc);
  m.def("codec", &codec_by_name, "name"_a, py::return_value_policy::copy);
  m.def("loss_budget_cap", &loss_budget_cap, "codec"_a, "natural_loss"_a, "plc"_a);

  m.def("insertion_rate", [](std::uint64_t covert_bits, const DurationModel& model, double t,
                             double cf, const std::string& codec) {
    SchedulerConfig sc;
    sc.covert_bits = covert_bits;
    sc.cf = cf;
    InsertionScheduler s(model, codec_by_name(codec), sc, 1.0);
    return s.insertion_rate(t);
  }, "covert_bits"_a, "model"_a, "t"_a, "cf"_a = 1.0, "codec"_a = "G.711");

  m.def("preset_names", &preset_names);
  m.def("validate_config", [](const std::string& text) {
    try {
      (void)config_from(text);
      return std::vector<std::string>{};
    } catch (const ConfigError& e) {
      return e.violations();
    }
  }, "text"_a);

  m.def("simulate", [](const std::string& config, std::optional<std::size_t> n_calls,
                       std::optional<std::uint64_t> seed) {
    ExperimentConfig c = config_from(config);
    if (n_calls) c.n_calls = *n_calls;
    if (seed) c.seed = *seed;
    BatchResult batch;
    {
      py::gil_scoped_release release;
      batch = run_batch(to_call_config(c), c.n_calls, c.seed, c.threads);
    }
    py::dict out = summary_dict(batch.summary);
    out["calls_csv"] = calls_csv(batch.calls);
    return out;
  }, "config"_a, "n_calls"_a = py::none(), "seed"_a = py::none(),
     "Run a batch from a preset name or key = value config text.");

  m.def("emit_figure", [](const std::string& kind, const std::string& config) {
    FigureKind k;
    if (kind == "fig2") {
      k = FigureKind::fig2;
    } else if (kind == "fig3") {
      k = FigureKind::fig3;
    } else if (kind == "fig4") {
      k = FigureKind::fig4;
    } else {
      throw py::value_error("kind must be fig2, fig3 or fig4");
    }
    return emit_figure_data(k, config_from(config));
  }, "kind"_a, "config"_a = "fig4");

  m.def("check_table1", [] {
    py::list out;
    for (const auto& r : check_table1()) {
      out.append(py::dict("k"_a = r.shape, "lam"_a = r.scale, "mean"_a = r.mean, "cv"_a = r.cv,
                          "printed_cv"_a = r.printed_cv, "ok"_a = r.mean_ok && r.cv_ok));
    }
    return out;
  });
}
