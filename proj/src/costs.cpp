#include "wardrop/costs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace wardrop {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

CostFunction::CostFunction(Form form, Capacity domain_cap)
    : form_(std::move(form)), domain_cap_(domain_cap) {
    if (const auto* a = std::get_if<Affine>(&form_)) {
        if (a->slope <= 0.0) throw ValidationError("affine cost needs slope > 0");
        if (a->intercept < 0.0) throw ValidationError("affine cost needs intercept >= 0");
    } else if (const auto* p = std::get_if<PiecewiseAffine>(&form_)) {
        if (p->intercept < 0.0) throw ValidationError("piecewise cost needs intercept >= 0");
        if (p->slopes.size() != p->breaks.size() + 1)
            throw ValidationError("piecewise cost needs one slope per piece");
        double prev = 0.0;
        for (double t : p->breaks) {
            if (t <= prev) throw ValidationError("piecewise breakpoints must increase from 0");
            prev = t;
        }
        for (double s : p->slopes)
            if (s <= 0.0) throw ValidationError("piecewise slopes must be > 0");
        // Precompute values and integrals at the breakpoints.
        double value = p->intercept, integral = 0.0, at = 0.0;
        for (std::size_t i = 0; i < p->breaks.size(); ++i) {
            double width = p->breaks[i] - at;
            integral += value * width + 0.5 * p->slopes[i] * width * width;
            value += p->slopes[i] * width;
            at = p->breaks[i];
            piece_values_.push_back(value);
            piece_integrals_.push_back(integral);
        }
    } else if (const auto* b = std::get_if<BoundedExp>(&form_)) {
        if (b->scale <= 0.0) throw ValidationError("bounded-exp cost needs scale > 0");
        if (b->slope < 0.0) throw ValidationError("bounded-exp cost needs slope >= 0");
    } else if (const auto* r = std::get_if<ReciprocalCapacity>(&form_)) {
        if (r->gamma <= 0.0) throw ValidationError("reciprocal cost needs gamma > 0");
        if (domain_cap_.is_infinite() || domain_cap_.value() != r->gamma)
            throw ValidationError("reciprocal cost requires a finite capacity equal to gamma");
    }
}

void CostFunction::check_domain(double x) const {
    if (x < 0.0) throw DomainViolation("load " + num(x) + " is negative");
    if (!domain_cap_.admits(x))
        throw DomainViolation("load " + num(x) + " is not below capacity " +
                              domain_cap_.to_string());
}

double CostFunction::eval(double x) const {
    check_domain(x);
    if (const auto* a = std::get_if<Affine>(&form_)) return a->slope * x + a->intercept;
    if (const auto* p = std::get_if<PiecewiseAffine>(&form_)) {
        std::size_t i = 0;
        while (i < p->breaks.size() && x > p->breaks[i]) ++i;
        double base = i == 0 ? p->intercept : piece_values_[i - 1];
        double from = i == 0 ? 0.0 : p->breaks[i - 1];
        return base + p->slopes[i] * (x - from);
    }
    if (const auto* b = std::get_if<BoundedExp>(&form_))
        return b->scale * (1.0 - std::exp(-x)) + b->slope * x;
    const auto& r = std::get<ReciprocalCapacity>(form_);
    return 1.0 / (r.gamma - x);
}

double CostFunction::antiderivative(double x) const {
    check_domain(x);
    if (const auto* a = std::get_if<Affine>(&form_))
        return a->intercept * x + 0.5 * a->slope * x * x;
    if (const auto* p = std::get_if<PiecewiseAffine>(&form_)) {
        std::size_t i = 0;
        while (i < p->breaks.size() && x > p->breaks[i]) ++i;
        double base_int = i == 0 ? 0.0 : piece_integrals_[i - 1];
        double base_val = i == 0 ? p->intercept : piece_values_[i - 1];
        double from = i == 0 ? 0.0 : p->breaks[i - 1];
        double w = x - from;
        return base_int + base_val * w + 0.5 * p->slopes[i] * w * w;
    }
    if (const auto* b = std::get_if<BoundedExp>(&form_))
        return b->scale * (x + std::exp(-x) - 1.0) + 0.5 * b->slope * x * x;
    const auto& r = std::get<ReciprocalCapacity>(form_);
    return std::log(r.gamma) - std::log(r.gamma - x);
}

double CostFunction::derivative(double x) const {
    check_domain(x);
    if (const auto* a = std::get_if<Affine>(&form_)) return a->slope;
    if (const auto* p = std::get_if<PiecewiseAffine>(&form_)) {
        std::size_t i = 0;
        while (i < p->breaks.size() && x >= p->breaks[i]) ++i;
        return p->slopes[i];
    }
    if (const auto* b = std::get_if<BoundedExp>(&form_)) return b->scale * std::exp(-x) + b->slope;
    const auto& r = std::get<ReciprocalCapacity>(form_);
    return 1.0 / ((r.gamma - x) * (r.gamma - x));
}

bool CostFunction::unbounded_at_capacity() const {
    if (std::holds_alternative<ReciprocalCapacity>(form_)) return true;
    if (domain_cap_.is_finite()) return false; // affine-like values stay finite at the cap
    if (const auto* b = std::get_if<BoundedExp>(&form_)) return b->slope > 0.0;
    return true; // affine and piecewise grow without bound on [0, inf)
}

bool CostFunction::same_parameters(const CostFunction& o) const {
    if (form_.index() != o.form_.index()) return false;
    if (const auto* a = std::get_if<Affine>(&form_)) {
        const auto& x = std::get<Affine>(o.form_);
        return a->slope == x.slope && a->intercept == x.intercept;
    }
    if (const auto* p = std::get_if<PiecewiseAffine>(&form_)) {
        const auto& x = std::get<PiecewiseAffine>(o.form_);
        return p->intercept == x.intercept && p->breaks == x.breaks && p->slopes == x.slopes;
    }
    if (const auto* b = std::get_if<BoundedExp>(&form_)) {
        const auto& x = std::get<BoundedExp>(o.form_);
        return b->scale == x.scale && b->slope == x.slope;
    }
    return std::get<ReciprocalCapacity>(form_).gamma == std::get<ReciprocalCapacity>(o.form_).gamma;
}

std::string CostFunction::spec_string() const {
    if (const auto* a = std::get_if<Affine>(&form_))
        return "affine " + num(a->slope) + " " + num(a->intercept);
    if (const auto* p = std::get_if<PiecewiseAffine>(&form_)) {
        std::string s = "pwaffine";
        for (double t : p->breaks) s += " " + num(t);
        for (double sl : p->slopes) s += " " + num(sl);
        return s;
    }
    if (const auto* b = std::get_if<BoundedExp>(&form_)) {
        std::string s = "bexp " + num(b->scale);
        if (b->slope != 0.0) s += " " + num(b->slope);
        return s;
    }
    return "recip " + num(std::get<ReciprocalCapacity>(form_).gamma);
}

// ---------------------------------------------------------------------------
// Belief
// ---------------------------------------------------------------------------

Belief::Belief(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw ValidationError("belief over an empty state space");
    double sum = 0.0;
    bool any = false;
    for (double w : w_) {
        if (w < 0.0) throw ValidationError("belief weight is negative");
        if (w > 0.0) any = true;
        sum += w;
    }
    if (!any) throw ValidationError("belief has empty support");
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError("belief weights sum to " + num(sum) + ", not 1");
}

Belief Belief::uniform(std::size_t n) {
    return Belief(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Belief Belief::dirac(std::size_t n, std::size_t state) {
    std::vector<double> w(n, 0.0);
    w.at(state) = 1.0;
    return Belief(std::move(w));
}

std::vector<std::size_t> Belief::support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i] > 0.0) s.push_back(i);
    return s;
}

bool Belief::is_dirac() const { return support().size() == 1; }

int Belief::dirac_state() const {
    auto s = support();
    return s.size() == 1 ? static_cast<int>(s.front()) : -1;
}

// ---------------------------------------------------------------------------
// CostFamily
// ---------------------------------------------------------------------------

CostFamily::CostFamily(std::vector<std::string> states,
                       std::vector<std::vector<CostFunction>> per_edge_per_state)
    : states_(std::move(states)), fns_(std::move(per_edge_per_state)) {
    if (states_.empty()) throw ValidationError("cost family needs at least one state");
    for (const auto& per_state : fns_)
        if (per_state.size() != states_.size())
            throw ValidationError("cost family needs one function per edge and state");
}

int CostFamily::state_index(const std::string& label) const {
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i] == label) return static_cast<int>(i);
    return -1;
}

double CostFamily::expected_cost(std::size_t edge, double x, const Belief& b) const {
    double c = 0.0;
    for (std::size_t s = 0; s < states_.size(); ++s)
        if (b.weight(s) > 0.0) c += b.weight(s) * fns_[edge][s].eval(x);
    return c;
}

double CostFamily::expected_antiderivative(std::size_t edge, double x, const Belief& b) const {
    double f = 0.0;
    for (std::size_t s = 0; s < states_.size(); ++s)
        if (b.weight(s) > 0.0) f += b.weight(s) * fns_[edge][s].antiderivative(x);
    return f;
}

double CostFamily::expected_derivative(std::size_t edge, double x, const Belief& b) const {
    double f = 0.0;
    for (std::size_t s = 0; s < states_.size(); ++s)
        if (b.weight(s) > 0.0) f += b.weight(s) * fns_[edge][s].derivative(x);
    return f;
}

void CostFamily::validate(const ValidatedNetwork& net) const {
    if (fns_.size() != net.edges().size())
        throw ValidationError("cost family covers " + std::to_string(fns_.size()) +
                              " edges, network has " + std::to_string(net.edges().size()));
    for (std::size_t e = 0; e < fns_.size(); ++e)
        for (std::size_t s = 0; s < states_.size(); ++s)
            if (!(fns_[e][s].domain_cap() == net.edges()[e].capacity))
                throw ValidationError("cost on edge " + net.edges()[e].id + " state " +
                                      states_[s] + " does not share the edge capacity");

    // Identifiability: every pair of states must differ on some edge, and the
    // difference must be certified by a witness load.
    for (std::size_t s1 = 0; s1 + 1 < states_.size(); ++s1) {
        for (std::size_t s2 = s1 + 1; s2 < states_.size(); ++s2) {
            bool certified = false;
            bool params_differ = false;
            for (std::size_t e = 0; e < fns_.size() && !certified; ++e) {
                if (fns_[e][s1].same_parameters(fns_[e][s2])) continue;
                params_differ = true;
                const Capacity& cap = fns_[e][s1].domain_cap();
                double hi = cap.is_finite() ? cap.value() : 100.0;
                hi = std::min(hi, 100.0);
                const int points = 10000;
                for (int i = 0; i < points; ++i) {
                    double x = hi * static_cast<double>(i) / static_cast<double>(points);
                    if (fns_[e][s1].eval(x) != fns_[e][s2].eval(x)) {
                        certified = true;
                        break;
                    }
                }
            }
            if (!certified) {
                std::string why = params_differ ? "no witness load found on the search grid"
                                                : "identical cost functions on every edge";
                throw IdentifiabilityFailure("states " + states_[s1] + " and " + states_[s2] +
                                             ": " + why);
            }
        }
    }
}

} // namespace wardrop
