#include "pdhj/chain_rule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pdhj/error.hpp"

namespace pdhj {

const char* to_string(ChainFunctional f) {
    switch (f) {
        case ChainFunctional::Upsilon:
            return "upsilon";
        case ChainFunctional::Nu:
            return "nu";
        case ChainFunctional::PsiSlice:
            return "psi-slice";
    }
    return "upsilon";
}

SmoothCurve SmoothCurve::from_path(const Path& x) {
    SmoothCurve c;
    c.t_start = x.grid().t_start();
    c.value = [x](double t) { return x.at(t); };
    c.derivative = [x](double t) {
        const std::size_t k = x.grid().segment(t);
        return Vec((x.value(k + 1) - x.value(k)) / x.grid().step(k));
    };
    c.breakpoints.assign(x.grid().nodes().begin(), x.grid().nodes().end());
    return c;
}

// ---------------------------------------------------------------------------
// RunningSup

namespace {

double golden_max(const std::function<double(double)>& f, double a, double b) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

}  // namespace

RunningSup::RunningSup(const SmoothCurve& curve, double t_end, std::size_t samples) : curve_(&curve) {
    const double a = curve.t_start;
    auto mag = [&](double s) { return curve.value(s).norm(); };
    std::vector<double> cand{a};
    if (t_end > a) {
        std::vector<double> s(samples + 1);
        std::vector<double> m(samples + 1);
        for (std::size_t i = 0; i <= samples; ++i) {
            s[i] = a + (t_end - a) * static_cast<double>(i) / static_cast<double>(samples);
            m[i] = mag(s[i]);
        }
        for (std::size_t i = 1; i < samples; ++i) {
            if (m[i] >= m[i - 1] && m[i] >= m[i + 1]) {
                cand.push_back(golden_max(mag, s[i - 1], s[i + 1]));
            }
        }
        for (double b : curve.breakpoints) {
            if (b >= a && b <= t_end) {
                cand.push_back(b);
            }
        }
    }
    std::sort(cand.begin(), cand.end());
    times_ = cand;
    prefix_.resize(times_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        run = std::max(run, mag(times_[i]));
        prefix_[i] = run;
    }
}

double RunningSup::prior(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return it == times_.begin() ? 0.0 : prefix_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double RunningSup::at(double t) const { return std::max(curve_->value(t).norm(), prior(t)); }

bool RunningSup::attains(double t) const { return curve_->value(t).norm() >= prior(t); }

// ---------------------------------------------------------------------------
// Chain rule

namespace {

// Largest increment of x' between neighbouring samples on [t0, t1].
double max_derivative_increment(const SmoothCurve& c, double t0, double t1, std::size_t n, double& max_abs) {
    // Midpoints only: a piecewise-linear path has no derivative at its nodes.
    auto at = [&](std::size_t i) {
        return c.derivative(t0 + (t1 - t0) * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    };
    double inc = 0.0;
    Vec prev = at(0);
    max_abs = std::max(max_abs, prev.norm());
    for (std::size_t i = 1; i < n; ++i) {
        const Vec cur = at(i);
        inc = std::max(inc, (cur - prev).norm());
        max_abs = std::max(max_abs, cur.norm());
        prev = cur;
    }
    return inc;
}

// Times in (t0, t1) where x(t) starts or stops attaining the running sup,
// located by bisection after a sampled scan.
std::vector<double> attainment_switches(const RunningSup& sup, double t0, double t1) {
    const std::size_t n = 1024;
    std::vector<double> out;
    double a = t0;
    bool state = sup.attains(t0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double b = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
        const bool next = sup.attains(b);
        if (next != state) {
            double lo = a;
            double hi = b;
            for (int it = 0; it < 64 && hi - lo > 1e-15 * (t1 - t0); ++it) {
                const double mid = 0.5 * (lo + hi);
                (sup.attains(mid) == state ? lo : hi) = mid;
            }
            const double s = 0.5 * (lo + hi);
            if (s > t0 && s < t1) {
                out.push_back(s);
            }
            state = next;
        }
        a = b;
    }
    return out;
}

void check_smooth(const SmoothCurve& c, double t0, double t1) {
    double max_abs = 0.0;
    const double coarse = max_derivative_increment(c, t0, t1, 512, max_abs);
    const double fine = max_derivative_increment(c, t0, t1, 1024, max_abs);
    if (fine > 1e-8 * (1.0 + max_abs) && fine > 0.75 * coarse) {
        std::ostringstream os;
        os << "curve derivative jumps by about " << fine << " inside [" << t0 << ", " << t1 << "]";
        throw ContractError("upsilon", os.str());
    }
}

}  // namespace

ChainRuleReport verify_chain_rule(const ChainRuleFunctional& functional, const SmoothCurve& x, double t0,
                                  double t1, const ChainRuleOptions& options) {
    if (!x.value || !x.derivative) {
        throw ParameterError("upsilon", "curve needs value and derivative functions");
    }
    if (!(t1 > t0) || t0 < x.t_start) {
        throw DomainError("upsilon", "chain rule interval must satisfy t_start <= t0 < t1");
    }
    if (options.levels.empty()) {
        throw ParameterError("upsilon", "at least one refinement level is required");
    }
    if (functional.kind == ChainFunctional::Nu && !functional.params) {
        throw ParameterError("upsilon", "nu functional needs Lyapunov parameters");
    }

    SmoothCurve curve = x;
    if (functional.kind == ChainFunctional::PsiSlice) {
        if (!functional.partner || !functional.partner->value || !functional.partner->derivative) {
            throw ParameterError("upsilon", "psi-slice functional needs a partner curve");
        }
        const SmoothCurve y = *functional.partner;
        curve.t_start = std::max(x.t_start, y.t_start);
        curve.value = [x, y](double s) { return Vec(x.value(s) - y.value(s)); };
        curve.derivative = [x, y](double s) { return Vec(x.derivative(s) - y.derivative(s)); };
        curve.breakpoints.insert(curve.breakpoints.end(), y.breakpoints.begin(), y.breakpoints.end());
        if (t0 < curve.t_start) {
            throw DomainError("upsilon", "partner curve starts after t0");
        }
    }
    check_smooth(curve, t0, t1);

    const RunningSup sup(curve, t1);
    auto phi = [&](double s) {
        const Vec cur = curve.value(s);
        const double m = sup.at(s);
        if (functional.kind == ChainFunctional::Nu) {
            return lyapunov_nu_from(*functional.params, s, cur, m).value;
        }
        return upsilon_from(cur, m).value;
    };
    // One-sided derivatives at the interval ends.
    const double nudge = 1e-12 * (t1 - t0);
    auto integrand = [&](double s) {
        const Vec cur = curve.value(s);
        const Vec vel = curve.derivative(std::clamp(s, t0 + nudge, t1 - nudge));
        const double m = sup.at(s);
        if (functional.kind == ChainFunctional::Nu) {
            const NuEval n = lyapunov_nu_from(*functional.params, s, cur, m);
            return n.dt + vel.dot(n.dx);
        }
        const UpsilonEval u = upsilon_from(cur, m);
        return u.dt + vel.dot(u.dx);
    };

    ChainRuleReport r;
    r.functional = to_string(functional.kind);
    r.t0 = t0;
    r.t1 = t1;
    r.lhs = phi(t1) - phi(t0);
    r.levels = options.levels;
    r.kink_times = attainment_switches(sup, t0, t1);
    r.kink = !r.kink_times.empty();

    // Trapezoid on the uniform level grid with the switch times added as
    // nodes, so each panel sees a smooth integrand.
    double abs_integral = 0.0;
    for (std::size_t n : options.levels) {
        if (n == 0) {
            throw ParameterError("upsilon", "refinement levels must be positive");
        }
        const double h = (t1 - t0) / static_cast<double>(n);
        std::vector<double> nodes;
        for (std::size_t i = 0; i <= n; ++i) {
            nodes.push_back(i == n ? t1 : t0 + h * static_cast<double>(i));
        }
        nodes.insert(nodes.end(), r.kink_times.begin(), r.kink_times.end());
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end(),
                                [&](double a, double b) { return b - a <= 1e-14 * (t1 - t0); }),
                    nodes.end());
        double sum = 0.0;
        double abs_sum = 0.0;
        double g_prev = integrand(nodes.front());
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const double g = integrand(nodes[i]);
            const double w = 0.5 * (nodes[i] - nodes[i - 1]);
            sum += w * (g_prev + g);
            abs_sum += w * (std::abs(g_prev) + std::abs(g));
            g_prev = g;
        }
        r.rhs = sum;
        abs_integral = abs_sum;
        r.gaps.push_back(std::abs(r.lhs - r.rhs));
    }
    r.abs_gap = r.gaps.back();
    r.rel_gap = r.abs_gap / std::max(std::abs(r.lhs), 1e-300);

    r.required_order = r.kink ? 0.9 : 1.9;

    const double floor_abs = options.floor * (1.0 + std::abs(r.lhs) + abs_integral);
    std::vector<double> envelope(r.gaps.size());
    double run = 0.0;
    for (std::size_t i = r.gaps.size(); i-- > 0;) {
        run = std::max(run, r.gaps[i]);
        envelope[i] = run;
    }
    // The envelope is non-increasing, so the levels above the floor are a prefix.
    std::size_t above = 0;
    while (above < envelope.size() && envelope[above] > floor_abs) {
        ++above;
    }
    if (above == 0) {
        r.exact = true;
        r.observed_order = 0.0;
        r.passed = true;
        return r;
    }
    const std::size_t first = above > options.fit_levels ? above - std::max<std::size_t>(options.fit_levels, 1) : 0;
    if (above - first == 1) {
        // Only one level above the floor: the drop to the floor bounds the order from below.
        const std::size_t i = first;
        r.observed_order = i + 1 < envelope.size()
                               ? std::log(envelope[i] / floor_abs) /
                                     std::log(static_cast<double>(r.levels[i + 1]) / static_cast<double>(r.levels[i]))
                               : 0.0;
    } else {
        std::vector<double> lx;
        std::vector<double> ly;
        for (std::size_t i = first; i < above; ++i) {
            lx.push_back(std::log((t1 - t0) / static_cast<double>(r.levels[i])));
            ly.push_back(std::log(envelope[i]));
        }
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        r.observed_order = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    r.passed = r.observed_order >= r.required_order;
    return r;
}

ChainRuleReport verify_chain_rule(const ChainRuleFunctional& functional, const Path& x, double t0, double t1,
                                  const ChainRuleOptions& options) {
    return verify_chain_rule(functional, SmoothCurve::from_path(x), t0, t1, options);
}

}  // namespace pdhj
