#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimovlc/harness.hpp"

namespace py = pybind11;
using namespace mimovlc;

namespace {

// JSON crosses the boundary as text; the Python side parses it.
ExperimentConfig config_from_text(const std::string& text)
{
    return config_from_json(text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text));
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Adaptive MIMO VLC link simulator";

    py::register_exception<Error>(m, "Error");

    m.def("constellation_points", [](int order) {
        const auto c = build_constellation(order);
        return std::vector<cplx>(c.points().begin(), c.points().end());
    });
    m.def("map_bits", [](const Bits& bits, int order) { return map_bits(bits, build_constellation(order)).symbols; });
    m.def("demap_symbols",
          [](const std::vector<cplx>& s, int order) { return demap_symbols(s, build_constellation(order)); });
    m.def("compute_evm", [](const std::vector<cplx>& rx, const std::vector<cplx>& ref) { return compute_evm(rx, ref); });

    m.def("predict_ber", &predict_ber, py::arg("order"), py::arg("gamma"));
    m.def("ber_bound", &ber_bound, py::arg("order"), py::arg("gamma"));
    m.def("max_spectral_efficiency", &max_spectral_efficiency, py::arg("gamma"), py::arg("ber_target"));
    m.def(
        "mode_thresholds",
        [](double ber_target) {
            AdaptPolicy p;
            p.ber_target = ber_target;
            const auto t = mode_threshold_table(p);
            return std::map<int, double>{{4, t[0]}, {16, t[1]}, {64, t[2]}, {256, t[3]}};
        },
        py::arg("ber_target") = 1e-3);
    m.def("encode_mode", [](const std::string& name) { return encode_mode(parse_mode(name)); });
    m.def("decode_mode", [](std::uint8_t code) { return to_string(decode_mode(code)); });

    m.def(
        "run_link",
        [](const std::string& config, double point, std::uint64_t seed) {
            const ExperimentConfig cfg = config_from_text(config);
            py::gil_scoped_release release;
            return report_to_json(run_link(cfg, point, seed)).dump();
        },
        py::arg("config"), py::arg("point"), py::arg("seed") = 1);
    m.def(
        "sweep_csv",
        [](const std::string& config) {
            const ExperimentConfig cfg = config_from_text(config);
            std::ostringstream out;
            {
                py::gil_scoped_release release;
                write_csv(out, sweep(cfg));
            }
            return out.str();
        },
        py::arg("config"));
    m.def("resolve_config", [](const std::string& config) { return config_to_json(config_from_text(config)).dump(); });
}
