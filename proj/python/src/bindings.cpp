#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dnls/config.hpp"
#include "dnls/dynamics.hpp"
#include "dnls/jost.hpp"
#include "dnls/parallel.hpp"
#include "dnls/propagator.hpp"
#include "dnls/scattering.hpp"
#include "dnls/spectral.hpp"
#include "dnls/standing_wave.hpp"

namespace py = pybind11;
using namespace dnls;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

CArray to_numpy(const ComplexField& u) {
    CArray out(static_cast<py::ssize_t>(u.size()));
    std::copy(u.values().begin(), u.values().end(), out.mutable_data());
    return out;
}

ComplexField to_field(const LatticeWindow& w, const CArray& a) {
    if (static_cast<std::size_t>(a.size()) != w.size()) throw std::invalid_argument("array length must match the window");
    return ComplexField(w, std::vector<cplx>(a.data(), a.data() + a.size()));
}

Side side_of(const std::string& s) {
    if (s == "+") return Side::plus;
    if (s == "-") return Side::minus;
    throw std::invalid_argument("side must be '+' or '-'");
}

TimeSign sign_of(const std::string& s) {
    if (s == "forward") return TimeSign::forward;
    if (s == "backward") return TimeSign::backward;
    throw std::invalid_argument("sign must be 'forward' or 'backward'");
}

py::object opt(const std::optional<cplx>& z) { return z ? py::cast(*z) : py::none(); }

LatticeWindow block_of(int radius, const LatticeWindow& w) {
    return radius > 0 ? LatticeWindow::symmetric(radius) : w;
}

py::dict stability_dict(const StabilityReport& r) {
    py::dict d;
    d["omega0"] = r.omega0;
    d["epsilon"] = r.epsilon;
    d["dt"] = r.dt;
    d["times"] = r.times;
    d["omega"] = r.omega;
    d["gamma"] = r.gamma;
    d["omega_dot"] = r.omega_dot;
    d["gamma_dot"] = r.gamma_dot;
    d["r_l2"] = r.r_l2;
    d["r_weighted"] = r.r_weighted;
    d["norm"] = r.norm;
    d["modulation_l1"] = r.modulation_l1;
    d["modulation_l1_cumulative"] = r.modulation_l1_cumulative;
    d["sup_omega_deviation"] = r.sup_omega_deviation;
    d["max_constraint_ratio"] = r.max_constraint_ratio;
    d["max_norm_drift"] = r.max_norm_drift;
    d["omega_plus"] = r.omega_plus;
    d["omega_plus_spread"] = r.omega_plus_spread;
    d["tube_exit"] = r.tube_exit;
    d["message"] = r.message;
    if (r.scattering) {
        d["matched_sign"] = r.scattering->matched_sign;
        d["u_plus"] = to_numpy(r.scattering->u_plus);
        d["cauchy_diffs"] = r.scattering->cauchy_diffs;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_dnls, m) {
    m.doc() = "Discrete Schrodinger operators H = -Delta + q and DNLS standing waves";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<HypothesisError>(m, "HypothesisError", PyExc_RuntimeError);

    m.def("set_threads", &set_thread_cap, py::arg("n"));

    py::class_<Potential>(m, "Potential")
        .def(py::init([](int n_min, const RArray& q) {
                 const int n = static_cast<int>(q.size());
                 return Potential(LatticeWindow(n_min, n_min + n - 1), std::vector<double>(q.data(), q.data() + n));
             }),
             py::arg("n_min"), py::arg("q"))
        .def_static("zero", [](int half) { return potentials::zero(LatticeWindow::symmetric(half)); }, py::arg("half"))
        .def_static("single_site", [](int half, double c, int site) {
            return potentials::single_site(LatticeWindow::symmetric(half), c, site);
        }, py::arg("half"), py::arg("c"), py::arg("site") = 0)
        .def_static("two_site", [](int half, double c1, double c2, int s1, int s2) {
            return potentials::two_site(LatticeWindow::symmetric(half), c1, c2, s1, s2);
        }, py::arg("half"), py::arg("c1"), py::arg("c2"), py::arg("site1") = 0, py::arg("site2") = 1)
        .def_static("exponential", [](int half, double c, double a, int radius) {
            return potentials::exponential(LatticeWindow::symmetric(half), c, a, radius);
        }, py::arg("half"), py::arg("c") = -0.5, py::arg("a") = 1.0, py::arg("radius") = 40)
        .def_property_readonly("n_min", [](const Potential& q) { return q.window().n_min(); })
        .def_property_readonly("n_max", [](const Potential& q) { return q.window().n_max(); })
        .def_property_readonly("values", [](const Potential& q) {
            return std::vector<double>(q.values().begin(), q.values().end());
        })
        .def("eta", &Potential::eta)
        .def("gamma_tail", &Potential::gamma_tail)
        .def("norm_l1_weighted", &Potential::norm_l1_weighted)
        .def("__len__", [](const Potential& q) { return q.window().size(); });

    m.def("apply_hamiltonian", [](const Potential& q, const CArray& u) {
        return to_numpy(apply_hamiltonian(q, to_field(q.window(), u)));
    }, py::arg("q"), py::arg("u"));

    m.def("jost_m", [](const Potential& q, const std::string& side, cplx theta) {
        return to_numpy(jost_m(q, side_of(side), SpectralPoint(theta)).m);
    }, py::arg("q"), py::arg("side"), py::arg("theta"), "Modified Jost function m on the window.");

    m.def("scattering_data", [](const Potential& q, double theta) {
        const auto s = scattering_data(q, theta);
        py::dict d;
        d["theta"] = s.theta;
        d["W"] = s.W;
        d["W1"] = s.W1;
        d["T"] = opt(s.T);
        d["R_plus"] = opt(s.R_plus);
        d["R_minus"] = opt(s.R_minus);
        return d;
    }, py::arg("q"), py::arg("theta"));

    m.def("classify_genericity", [](const Potential& q) {
        const auto g = classify_genericity(q);
        py::dict d;
        d["is_generic"] = g.is_generic;
        d["resonant_edges"] = g.resonant_edges;
        d["W_at_0"] = g.W_at_0;
        d["W_at_pi"] = g.W_at_pi;
        return d;
    }, py::arg("q"));

    m.def("discrete_spectrum", [](const Potential& q) {
        const auto s = discrete_spectrum(q);
        return py::make_tuple(s.eigenvalues, s.eigenvectors);
    }, py::arg("q"), "(eigenvalues, eigenvectors) outside the band.");

    m.def("resolvent_kernel", [](const Potential& q, cplx z, int block_radius) {
        return resolvent_kernel(q, z, block_of(block_radius, q.window())).K;
    }, py::arg("q"), py::arg("z"), py::arg("block_radius") = 0);

    m.def("free_propagator", [](double t, int k, const std::string& sign) {
        return free_propagator(t, k, sign_of(sign));
    }, py::arg("t"), py::arg("k"), py::arg("sign") = "forward");

    m.def("continuous_propagator", [](const Potential& q, double t, const std::string& sign, int block_radius) {
        PropagatorOptions o;
        o.sign = sign_of(sign);
        o.block = block_of(block_radius, q.window());
        return continuous_propagator(q, t, o).K;
    }, py::arg("q"), py::arg("t"), py::arg("sign") = "forward", py::arg("block_radius") = 0,
       "Kernel block of e^{s i t H} P_c.");

    m.def("decay_scan", [](const Potential& q, const std::vector<double>& times, int block_radius) {
        DecayScanOptions o;
        o.block = block_of(block_radius, q.window());
        const auto s = decay_scan(q, times, o);
        py::dict d;
        d["times"] = s.times;
        d["sup"] = s.sup_kernel;
        d["weighted"] = s.weighted;
        d["C_measured"] = s.C_measured;
        d["slope"] = s.slope ? py::cast(*s.slope) : py::none();
        return d;
    }, py::arg("q"), py::arg("times"), py::arg("block_radius") = 0);

    m.def("solve_branch", [](const Potential& q, const std::vector<double>& omegas, int power) {
        StandingWaveOptions o;
        o.power = power;
        const auto b = solve_branch(q, omegas, o);
        py::list entries;
        for (const auto& e : b.entries) {
            py::dict d;
            d["omega"] = e.omega;
            d["a"] = e.a;
            d["residual"] = e.residual;
            d["converged"] = e.converged;
            d["phi"] = to_numpy(e.phi);
            entries.append(d);
        }
        return py::make_tuple(b.E0, entries);
    }, py::arg("q"), py::arg("omegas"), py::arg("power") = 7, "(E0, entries) of the standing-wave branch.");

    m.def("standing_wave_residual", [](const Potential& q, const CArray& phi, double omega, int power) {
        return standing_wave_residual(q, to_field(q.window(), phi), omega, power);
    }, py::arg("q"), py::arg("phi"), py::arg("omega"), py::arg("power") = 7);

    m.def("evolve", [](const Potential& q, const CArray& u0, double t_final, double dt, bool nonlinear, double stride) {
        EvolveOptions o;
        o.dt = dt;
        o.nonlinear = nonlinear;
        o.output_stride = stride;
        const auto tr = evolve(q, to_field(q.window(), u0), t_final, o);
        py::array_t<cplx> states({static_cast<py::ssize_t>(tr.states.size()), static_cast<py::ssize_t>(q.window().size())});
        auto s = states.mutable_unchecked<2>();
        for (std::size_t k = 0; k < tr.states.size(); ++k) {
            for (std::size_t i = 0; i < q.window().size(); ++i) {
                s(static_cast<py::ssize_t>(k), static_cast<py::ssize_t>(i)) = tr.states[k].values()[i];
            }
        }
        return py::make_tuple(tr.times, states, tr.norms);
    }, py::arg("q"), py::arg("u0"), py::arg("t_final"), py::arg("dt") = 1.0 / 32.0, py::arg("nonlinear") = true,
       py::arg("stride") = 1.0);

    py::class_<StandingWaveFamily>(m, "StandingWaveFamily")
        .def(py::init([](const Potential& q, int power) {
                 StandingWaveOptions o;
                 o.power = power;
                 return StandingWaveFamily(q, o);
             }),
             py::arg("q"), py::arg("power") = 7)
        .def_property_readonly("E0", &StandingWaveFamily::E0)
        .def("phi", [](const StandingWaveFamily& f, double omega) { return f.phi(omega); }, py::arg("omega"))
        .def("decompose", [](const StandingWaveFamily& f, const CArray& u, double omega, double Theta) {
            const auto st = modulation_decompose(f, to_field(f.window(), u), omega, Theta);
            py::dict d;
            d["omega"] = st.omega;
            d["Theta"] = st.Theta;
            d["r"] = to_numpy(st.r);
            d["constraint_re"] = st.constraint_re;
            d["constraint_im"] = st.constraint_im;
            return d;
        }, py::arg("u"), py::arg("omega"), py::arg("Theta") = 0.0);

    m.def("stability_run", [](const Potential& q, const StandingWaveFamily& fam, double omega0, double epsilon,
                              double t_final, double dt, double width) {
        StabilityOptions o;
        o.dt = dt;
        return stability_dict(stability_run(q, fam, omega0, gaussian_perturbation(q.window(), epsilon, width), t_final, o));
    }, py::arg("q"), py::arg("family"), py::arg("omega0"), py::arg("epsilon"), py::arg("t_final"),
       py::arg("dt") = 1.0 / 128.0, py::arg("width") = 3.0);

    m.def("default_config", [] { return RunConfig().to_ini(); }, "Default configuration as INI text.");
    m.def("normalize_config", [](const std::string& ini) {
        const RunConfig c = RunConfig::from_ini(ini);
        c.validate();
        return c.to_ini();
    }, py::arg("ini"), "Parse, validate and re-serialize INI text.");
}
