#include "vibratrak/model.hpp"

#include <cmath>
#include <sstream>

namespace vibratrak {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

/// Coefficient of the |x|^(chi+2) term in the softening-II law.
double softening_ii_coeff(const SofteningII& s) {
    const double denom = s.beta + (s.chi + 1.0) / (s.chi + 2.0);
    return std::pow(s.k_t * denom / (s.F_s * (1.0 + s.beta)), 1.0 + s.chi) * s.k_t /
           ((1.0 + s.beta) * (s.chi + 2.0));
}

}  // namespace

bool is_hysteretic(const ForceModel& force) {
    return std::holds_alternative<Jenkins>(force) || std::holds_alternative<Iwan>(force);
}

bool is_odd(const ForceModel& force) {
    return !std::holds_alternative<UnilateralSpring>(force);
}

bool is_dissipative(const ForceModel& force) {
    return is_hysteretic(force) || std::holds_alternative<CubicDamping>(force);
}

std::string force_kind_name(const ForceModel& force) {
    return std::visit(overloaded{[](const StiffeningDuffing&) { return "stiffening_duffing"; },
                                 [](const QuinticStiffness&) { return "quintic"; },
                                 [](const SofteningDuffing&) { return "softening_duffing"; },
                                 [](const SofteningII&) { return "softening_ii"; },
                                 [](const UnilateralSpring&) { return "unilateral_spring"; },
                                 [](const CubicDamping&) { return "cubic_damping"; },
                                 [](const Jenkins&) { return "jenkins"; },
                                 [](const Iwan&) { return "iwan"; }},
                      force);
}

void validate(const ForceModel& force) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid force model: ") + what);
    };
    std::visit(overloaded{
                   [&](const StiffeningDuffing& f) { require(f.alpha >= 0.0, "stiffening Duffing needs alpha >= 0"); },
                   [&](const QuinticStiffness& f) { require(f.eta >= 0.0, "quintic needs eta >= 0"); },
                   [&](const SofteningDuffing& f) { require(f.alpha < 0.0, "softening Duffing needs alpha < 0"); },
                   [&](const SofteningII& f) {
                       require(f.k_t > 0.0 && f.F_s > 0.0, "softening II needs k_t > 0 and F_s > 0");
                       require(f.chi > -1.0 && f.chi <= 0.0, "softening II needs chi in (-1, 0]");
                       require(f.beta >= 0.0, "softening II needs beta >= 0");
                   },
                   [&](const UnilateralSpring& f) { require(f.k_nl >= 0.0, "unilateral spring needs k_nl >= 0"); },
                   [&](const CubicDamping& f) { require(f.gamma >= 0.0, "cubic damping needs gamma >= 0"); },
                   [&](const Jenkins& f) { require(f.k_t > 0.0 && f.F_s > 0.0, "Jenkins needs k_t > 0 and F_s > 0"); },
                   [&](const Iwan& f) {
                       require(f.k_t > 0.0 && f.F_s > 0.0, "Iwan needs k_t > 0 and F_s > 0");
                       require(f.chi > -1.0 && f.chi <= 0.0, "Iwan needs chi in (-1, 0]");
                       require(f.beta >= 0.0, "Iwan needs beta >= 0");
                       require(f.n_sliders >= 2, "Iwan needs n_sliders >= 2");
                   }},
               force);
}

double phi_max(double F_s, double k_t, double chi, double beta) {
    if (chi <= -1.0) throw std::domain_error("phi_max: chi <= -1 makes the slider distribution non-integrable");
    return F_s * (1.0 + beta) / (k_t * (beta + (chi + 1.0) / (chi + 2.0)));
}

double linearized_stiffness(const ForceModel& force) {
    return std::visit(overloaded{[](const StiffeningDuffing&) { return 0.0; },
                                 [](const QuinticStiffness&) { return 0.0; },
                                 [](const SofteningDuffing&) { return 0.0; },
                                 [](const SofteningII& f) { return f.k_t; },
                                 [](const UnilateralSpring& f) { return 0.5 * f.k_nl; },
                                 [](const CubicDamping&) { return 0.0; },
                                 [](const Jenkins& f) { return f.k_t; },
                                 [](const Iwan& f) { return f.k_t; }},
                      force);
}

InstantEval eval_instantaneous(const ForceModel& force, double x, double v) {
    return std::visit(
        overloaded{
            [&](const StiffeningDuffing& f) {
                return InstantEval{f.alpha * x * x * x, 3.0 * f.alpha * x * x, 0.0};
            },
            [&](const QuinticStiffness& f) {
                const double x2 = x * x;
                return InstantEval{f.eta * x2 * x2 * x, 5.0 * f.eta * x2 * x2, 0.0};
            },
            [&](const SofteningDuffing& f) {
                return InstantEval{f.alpha * x * x * x, 3.0 * f.alpha * x * x, 0.0};
            },
            [&](const SofteningII& f) {
                const double pm = phi_max(f.F_s, f.k_t, f.chi, f.beta);
                if (std::abs(x) >= pm) return InstantEval{f.F_s * sgn(x), 0.0, 0.0};
                const double c = softening_ii_coeff(f);
                const double ax = std::abs(x);
                const double val = f.k_t * x - c * std::pow(ax, f.chi + 2.0) * sgn(x);
                const double slope = f.k_t - c * (f.chi + 2.0) * std::pow(ax, f.chi + 1.0);
                return InstantEval{val, slope, 0.0};
            },
            [&](const UnilateralSpring& f) {
                // right-limit derivative at x = 0 by convention
                return InstantEval{x > 0.0 ? f.k_nl * x : 0.0, x >= 0.0 ? f.k_nl : 0.0, 0.0};
            },
            [&](const CubicDamping& f) {
                return InstantEval{f.gamma * v * v * v, 0.0, 3.0 * f.gamma * v * v};
            },
            [&](const Jenkins&) -> InstantEval {
                throw std::invalid_argument("eval_instantaneous: Jenkins is history dependent");
            },
            [&](const Iwan&) -> InstantEval {
                throw std::invalid_argument("eval_instantaneous: Iwan is history dependent");
            }},
        force);
}

HystereticState initial_state(const ForceModel& force, double x0) {
    if (const auto* j = std::get_if<Jenkins>(&force)) {
        (void)j;
        return JenkinsState{x0, 0.0};
    }
    if (const auto* iw = std::get_if<Iwan>(&force)) {
        IwanState s;
        s.x0 = x0;
        s.f_phi0 = Eigen::VectorXd::Zero(iw->n_sliders + 1);
        return s;
    }
    throw std::invalid_argument("initial_state: not a hysteretic model");
}

HystStep eval_hysteretic_step(const ForceModel& force, double x, HystereticState& state) {
    if (const auto* j = std::get_if<Jenkins>(&force)) {
        auto* s = std::get_if<JenkinsState>(&state);
        if (!s) throw std::invalid_argument("eval_hysteretic_step: state does not match Jenkins");
        const double f_stuck = j->k_t * (x - s->x0) + s->f0;
        HystStep out{};
        if (std::abs(f_stuck) < j->F_s) {
            out.f = f_stuck;
            out.df_dx = j->k_t;
        } else {
            out.f = j->F_s * sgn(f_stuck);
            out.df_dx = 0.0;
        }
        s->x0 = x;
        s->f0 = out.f;
        return out;
    }
    if (const auto* iw = std::get_if<Iwan>(&force)) {
        auto* s = std::get_if<IwanState>(&state);
        if (!s) throw std::invalid_argument("eval_hysteretic_step: state does not match Iwan");
        if (s->f_phi0.size() != iw->n_sliders + 1)
            throw std::invalid_argument("eval_hysteretic_step: state slider count mismatch");
        const double pm = phi_max(iw->F_s, iw->k_t, iw->chi, iw->beta);
        const double denom = iw->beta + (iw->chi + 1.0) / (iw->chi + 2.0);
        const double rho_coef = iw->F_s * (iw->chi + 1.0) / (std::pow(pm, iw->chi + 2.0) * denom);
        const double dphi = pm / iw->n_sliders;
        const double dirac_w = iw->F_s * iw->beta / (pm * denom);
        double f = 0.0;
        double tangent = 0.0;
        for (int i = 0; i <= iw->n_sliders; ++i) {
            const bool dirac = (i == iw->n_sliders);
            const double phi = dirac ? pm : (i + 0.5) * dphi;
            const double w = dirac ? dirac_w : rho_coef * std::pow(phi, iw->chi) * dphi;
            const double raw = (x - s->x0) + s->f_phi0[i];
            if (std::abs(raw) < phi) {
                s->f_phi0[i] = raw;
                tangent += w;
            } else {
                s->f_phi0[i] = phi * sgn(raw);
            }
            f += w * s->f_phi0[i];
        }
        s->x0 = x;
        return HystStep{f, tangent};
    }
    throw std::invalid_argument("eval_hysteretic_step: not a hysteretic model");
}

SystemConfig SystemConfig::make(double m, double c, double k, ForceModel force, int H, int Nt,
                                double x_ref) {
    validate(force);
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid system: ") + what);
    };
    require(m > 0.0, "m must be > 0");
    require(c >= 0.0, "c must be >= 0");
    require(k >= 0.0, "k must be >= 0");
    require(H >= 1, "H must be >= 1");
    require(Nt >= 4 * H, "Nt must be >= 4H");
    require((Nt & (Nt - 1)) == 0, "Nt must be a power of two");

    SystemConfig sys;
    sys.m = m;
    sys.c = c;
    sys.k = k;
    sys.force = force;
    sys.H = H;
    sys.Nt = Nt;
    if (x_ref > 0.0) {
        sys.x_ref = x_ref;
    } else if (const auto* j = std::get_if<Jenkins>(&force)) {
        sys.x_ref = j->F_s / j->k_t;
    } else if (const auto* iw = std::get_if<Iwan>(&force)) {
        sys.x_ref = phi_max(iw->F_s, iw->k_t, iw->chi, iw->beta);
    } else if (const auto* s = std::get_if<SofteningII>(&force)) {
        sys.x_ref = phi_max(s->F_s, s->k_t, s->chi, s->beta);
    } else {
        sys.x_ref = 1.0;
    }
    sys.k_lin = k + linearized_stiffness(force);
    require(sys.k_lin > 0.0, "k_lin must be > 0");
    return sys;
}

Scales nondimensionalize(const SystemConfig& sys) {
    Scales s;
    s.omega0 = std::sqrt(sys.k_lin / sys.m);
    s.zeta0 = sys.c / (2.0 * std::sqrt(sys.k_lin * sys.m));
    s.k_hat = sys.k / sys.k_lin;
    const double kx = sys.k_lin * sys.x_ref;
    std::visit(overloaded{[&](const StiffeningDuffing& f) {
                              s.alpha_hat = f.alpha * sys.x_ref * sys.x_ref / sys.k_lin;
                          },
                          [&](const QuinticStiffness& f) {
                              s.eta_hat = f.eta * std::pow(sys.x_ref, 4) / sys.k_lin;
                          },
                          [&](const SofteningDuffing& f) {
                              s.alpha_hat = f.alpha * sys.x_ref * sys.x_ref / sys.k_lin;
                          },
                          [&](const SofteningII& f) {
                              s.k_t_hat = f.k_t / sys.k_lin;
                              s.F_s_hat = f.F_s / kx;
                          },
                          [&](const UnilateralSpring& f) { s.k_nl_hat = f.k_nl / sys.k_lin; },
                          [&](const CubicDamping& f) {
                              s.gamma_hat = f.gamma * std::pow(s.omega0 * sys.x_ref, 3) / kx;
                          },
                          [&](const Jenkins& f) {
                              s.k_t_hat = f.k_t / sys.k_lin;
                              s.F_s_hat = f.F_s / kx;
                          },
                          [&](const Iwan& f) {
                              s.k_t_hat = f.k_t / sys.k_lin;
                              s.F_s_hat = f.F_s / kx;
                          }},
               sys.force);
    return s;
}

}  // namespace vibratrak
