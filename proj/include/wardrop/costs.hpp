#ifndef WARDROP_COSTS_HPP
#define WARDROP_COSTS_HPP

#include "wardrop/network.hpp"

#include <string>
#include <variant>
#include <vector>

namespace wardrop {

// Cost function variants. Each one is continuous, strictly increasing on
// [0, capacity) and carries a closed-form antiderivative, so the Beckmann
// potential is exact.

struct Affine {
    double slope;     // > 0
    double intercept; // >= 0
};

struct PiecewiseAffine {
    double intercept;             // value at load 0, >= 0
    std::vector<double> breaks;   // strictly increasing, all > 0
    std::vector<double> slopes;   // breaks.size() + 1 entries, all > 0
};

// k * (1 - e^{-x}) + slope * x, bounded by k when slope == 0.
struct BoundedExp {
    double scale;       // k > 0
    double slope = 0.0; // >= 0
};

// 1 / (gamma - x) on [0, gamma); diverges at capacity.
struct ReciprocalCapacity {
    double gamma; // > 0, must equal the edge capacity
};

class CostFunction {
public:
    using Form = std::variant<Affine, PiecewiseAffine, BoundedExp, ReciprocalCapacity>;

    CostFunction(Form form, Capacity domain_cap);

    double eval(double x) const;           // throws DomainViolation outside [0, cap)
    double antiderivative(double x) const; // F(x) = integral of eval on [0, x]
    double derivative(double x) const;     // right-derivative of eval
    bool unbounded_at_capacity() const;

    const Form& form() const { return form_; }
    const Capacity& domain_cap() const { return domain_cap_; }

    // Parameter-level equality, used as the first stage of the
    // identifiability check.
    bool same_parameters(const CostFunction& o) const;

    std::string spec_string() const; // scenario-file syntax, e.g. "affine 1 0"

private:
    void check_domain(double x) const;
    Form form_;
    Capacity domain_cap_;
    std::vector<double> piece_values_;    // piecewise: value at each break
    std::vector<double> piece_integrals_; // piecewise: F at each break
};

/**
 * Probability vector over the state space, stored in canonical state order.
 * Weights are nonnegative and sum to one within 1e-12.
 */
class Belief {
public:
    explicit Belief(std::vector<double> weights);
    static Belief uniform(std::size_t n);
    static Belief dirac(std::size_t n, std::size_t state);

    double weight(std::size_t state) const { return w_[state]; }
    std::size_t size() const { return w_.size(); }
    const std::vector<double>& weights() const { return w_; }

    std::vector<std::size_t> support() const;
    bool is_dirac() const; // exactly one state carries all the mass
    int dirac_state() const;

    bool operator==(const Belief& o) const { return w_ == o.w_; }

private:
    std::vector<double> w_;
};

/**
 * Per-edge, per-state cost functions over a finite state space.
 * States and edges are in canonical (declaration) order.
 */
class CostFamily {
public:
    CostFamily(std::vector<std::string> states,
               std::vector<std::vector<CostFunction>> per_edge_per_state);

    std::size_t num_states() const { return states_.size(); }
    std::size_t num_edges() const { return fns_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    int state_index(const std::string& label) const;

    const CostFunction& fn(std::size_t edge, std::size_t state) const {
        return fns_[edge][state];
    }

    double cost(std::size_t edge, std::size_t state, double x) const {
        return fns_[edge][state].eval(x);
    }
    double expected_cost(std::size_t edge, double x, const Belief& b) const;
    double expected_antiderivative(std::size_t edge, double x, const Belief& b) const;
    double expected_derivative(std::size_t edge, double x, const Belief& b) const;

    /**
     * Checks that the family is admissible for `net`: one function per edge
     * and state, domain caps equal to edge capacities, and every pair of
     * states distinguishable on some edge, certified by a witness load
     * where the two values differ. Throws on failure.
     */
    void validate(const ValidatedNetwork& net) const;

private:
    std::vector<std::string> states_;
    std::vector<std::vector<CostFunction>> fns_; // [edge][state]
};

} // namespace wardrop

#endif
