#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fops/analyzer.hpp"
#include "fops/io.hpp"
#include "fops/simulation.hpp"
#include "fops/sweep.hpp"

namespace py = pybind11;
using namespace fops;

namespace {

py::object from_json(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

Condition condition_from(const std::string& s)
{
    if (s == "self")
        return Condition::Self;
    if (s == "good")
        return Condition::Good;
    if (s == "bad")
        return Condition::Bad;
    throw std::invalid_argument("condition must be 'self', 'good' or 'bad'");
}

py::dict result_dict(const Replication& rep)
{
    const auto& r = rep.result;
    py::dict d;
    d["anticipated"] = r.anticipated;
    d["realized"] = r.realized;
    d["visits"] = r.visits;
    d["losses"] = r.losses;
    d["services"] = r.services;
    d["mof"] = r.mof;
    d["server_utility"] = r.server_utility;
    d["bound_violations"] = r.bound_violations;
    d["seed"] = r.seed;
    d["epochs"] = r.epochs;
    std::vector<long> epoch;
    std::vector<std::vector<double>> ubar;
    std::vector<std::vector<int>> queues;
    for (const auto& s : rep.trajectory.snapshots) {
        epoch.push_back(s.epoch);
        ubar.push_back(s.anticipated);
        queues.push_back(s.queues);
    }
    py::dict t;
    t["epoch"] = epoch;
    t["ubar"] = ubar;
    t["queues"] = queues;
    d["trajectory"] = t;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Fair opportunistic polling: simulator and exact analyzer";

    py::class_<TravelLaw>(m, "TravelLaw")
        .def(py::init<>())
        .def(py::init([](double mean, double spread) { return TravelLaw{mean, spread}; }), py::arg("mean"),
             py::arg("spread"))
        .def_readwrite("mean", &TravelLaw::mean)
        .def_readwrite("spread", &TravelLaw::spread)
        .def("truncated_mean", [](const TravelLaw& t) { return truncated_mean(t); });

    py::class_<SystemConfig>(m, "Config")
        .def(py::init<>())
        .def_static("from_json", [](const std::string& s) { return config_from_json(nlohmann::json::parse(s)); })
        .def_static("from_file", &load_config)
        .def("to_json", [](const SystemConfig& c) { return config_to_json(c).dump(); })
        .def("copy", [](const SystemConfig& c) { return c; })
        .def_readwrite("m", &SystemConfig::m)
        .def_readwrite("lambda_", &SystemConfig::lambda)
        .def_readwrite("buffers", &SystemConfig::buffers)
        .def_readwrite("service_rate", &SystemConfig::service_rate)
        .def_readwrite("travel_good", &SystemConfig::travel_good)
        .def_readwrite("travel_bad", &SystemConfig::travel_bad)
        .def_readwrite("p_good", &SystemConfig::p_good)
        .def_readwrite("reward", &SystemConfig::reward)
        .def_readwrite("alpha", &SystemConfig::alpha)
        .def_readwrite("delta", &SystemConfig::delta)
        .def_readwrite("gamma", &SystemConfig::gamma)
        .def_readwrite("seed", &SystemConfig::seed)
        .def("__repr__", [](const SystemConfig& c) { return "Config(" + config_to_json(c).dump() + ")"; });

    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "validate",
        [](const SystemConfig& c) {
            const auto d = validate_config(c);
            py::dict out;
            out["valid"] = d.valid();
            out["ok"] = d.ok();
            out["rho_b"] = d.rho_b;
            out["loss_bound"] = d.loss_bound;
            out["loss_assumption"] = d.a1_pass;
            out["violations"] = d.violations;
            return out;
        },
        py::arg("config"));

    py::class_<AnticipationEvaluator>(m, "Evaluator")
        .def(py::init<const SystemConfig&>(), py::arg("config"))
        .def(
            "gain",
            [](const AnticipationEvaluator& e, int station, int queue, const std::string& c) {
                return e.gain(station, queue, condition_from(c));
            },
            py::arg("station"), py::arg("queue"), py::arg("condition"))
        .def(
            "loss",
            [](const AnticipationEvaluator& e, int station, int queue, const std::string& c) {
                return e.loss(station, queue, condition_from(c));
            },
            py::arg("station"), py::arg("queue"), py::arg("route"))
        .def_property_readonly("loss_bound", &AnticipationEvaluator::loss_bound);

    m.def(
        "run",
        [](const SystemConfig& c, long epochs, std::optional<std::uint64_t> seed, std::uint64_t replication,
           long thin) {
            RunOptions o;
            o.epochs = epochs;
            o.seed = seed.value_or(c.seed);
            o.replication = replication;
            o.thinning = thin;
            Replication rep;
            {
                py::gil_scoped_release release;
                rep = run_replication(c, o);
            }
            return result_dict(rep);
        },
        py::arg("config"), py::arg("epochs") = 200000, py::arg("seed") = py::none(), py::arg("replication") = 0,
        py::arg("thin") = 0);

    m.def(
        "solve_fixed_point",
        [](const SystemConfig& c) {
            FixedPointReport r;
            {
                py::gil_scoped_release release;
                r = solve_fixed_point(c);
            }
            return from_json(to_json(r));
        },
        py::arg("config"));

    m.def(
        "check_mof_bound",
        [](const SystemConfig& c, double alpha) {
            BoundCheck b;
            {
                py::gil_scoped_release release;
                b = check_mof_bound(c, alpha);
            }
            return from_json(to_json(b));
        },
        py::arg("config"), py::arg("alpha"));

    m.def(
        "sweep",
        [](const std::string& path, std::optional<long> epochs, int workers) {
            auto spec = load_sweep(path);
            if (epochs)
                spec.epochs = *epochs;
            SweepResult res;
            {
                py::gil_scoped_release release;
                res = run_sweep(spec, workers);
            }
            py::list rows;
            for (const auto& c : res.cells) {
                py::dict d;
                d["m"] = c.m;
                d["alpha"] = c.alpha;
                d["replication"] = c.replication;
                d["seed"] = c.seed;
                d["ok"] = c.ok;
                d["error"] = c.error;
                d["mof"] = c.ok ? py::cast(c.result.mof) : py::none();
                d["pof"] = c.pof ? py::cast(*c.pof) : py::none();
                d["ubar"] = c.result.anticipated;
                rows.append(d);
            }
            return rows;
        },
        py::arg("path"), py::arg("epochs") = py::none(), py::arg("workers") = 0);

    m.def("mof", [](const std::vector<double>& u, double delta) { return mof(u, delta); }, py::arg("averages"),
          py::arg("delta"));
    m.def(
        "pof", [](const std::vector<double>& a, const std::vector<double>& z) { return pof(a, z); },
        py::arg("with_alpha"), py::arg("with_zero"));

    py::register_exception<StateCapExceeded>(m, "StateCapExceeded", PyExc_RuntimeError);
}
