#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/ips.hpp"

namespace ipskit {

// Greedy partition of the Boolean cube by first falsified clause: A_i holds
// the assignments that falsify clause i and satisfy all earlier clauses.
// Assignments satisfying every clause land in `uncovered`.
struct GreedyPartition {
    std::vector<std::vector<std::uint32_t>> parts; // assignment masks, per clause
    std::vector<std::uint32_t> uncovered;
};

// `clause_order`, when nonempty, is a permutation of 0..m-1 giving the order
// in which the greedy pass tries clauses; parts stay indexed by clause.
inline GreedyPartition greedy_partition(const CnfFormula& cnf,
                                        const std::vector<std::uint32_t>& clause_order = {}) {
    if (cnf.n_vars > 24) throw CubeTooLarge("greedy partition limited to n <= 24");
    std::vector<std::uint32_t> order = clause_order;
    if (order.empty()) {
        order.resize(cnf.clauses.size());
        std::iota(order.begin(), order.end(), 0u);
    }
    if (order.size() != cnf.clauses.size())
        throw InputError("clause order must be a permutation of all clause indices");
    GreedyPartition gp;
    gp.parts.resize(cnf.clauses.size());
    for (std::uint64_t a = 0; a < (1ull << cnf.n_vars); ++a) {
        auto mask = static_cast<std::uint32_t>(a);
        bool placed = false;
        for (std::uint32_t i : order) {
            if (!clause_satisfied(cnf.clauses[i], mask)) {
                gp.parts[i].push_back(mask);
                placed = true;
                break;
            }
        }
        if (!placed) gp.uncovered.push_back(mask);
    }
    return gp;
}

namespace detail {

// Selector b(e,x): x when the bit e is 1, 1-x when it is 0. Products of
// selectors over the cube form a partition of unity.
inline std::uint32_t selector_node(Circuit& c, bool e, std::uint32_t var_index,
                                   std::uint32_t& one, bool& have_one) {
    std::uint32_t x = c.add_var(VarId::X(var_index));
    if (e) return x;
    if (!have_one) { one = c.add_const(1); have_one = true; }
    return c.add_lin({1, -1}, {one, x});
}

inline std::uint32_t clause_var_mask(const std::vector<std::int32_t>& clause) {
    std::uint32_t m = 0;
    for (std::int32_t lit : clause) m |= 1u << ((lit > 0 ? lit : -lit) - 1);
    return m;
}

} // namespace detail

// The closed-form placeholder-linear certificate
//   sum_i f_i * ( sum_{e in A_i} prod_{j: x_j not in clause i} b(e_j, x_j) ).
// Valid exactly when the CNF is unsatisfiable; Boolean-axiom placeholders are
// not needed, but `pad_boolean_axioms` appends them with zero coefficients so
// the placeholder range matches a system that carries the axioms.
inline Certificate build_certificate_explicit(const CnfFormula& cnf,
                                              bool pad_boolean_axioms = false,
                                              std::uint64_t modulus = 0,
                                              const std::vector<std::uint32_t>& clause_order = {}) {
    if (cnf.n_vars > 20) throw CubeTooLarge("explicit certificate limited to n <= 20");
    GreedyPartition gp = greedy_partition(cnf, clause_order);
    Circuit c;
    std::uint32_t one = 0;
    bool have_one = false;
    std::vector<std::int64_t> coeffs;
    std::vector<std::uint32_t> terms;
    for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
        std::uint32_t f = c.add_var(VarId::F(static_cast<std::uint32_t>(i + 1)));
        std::uint32_t g;
        if (gp.parts[i].empty()) {
            g = c.add_const(0);
        } else {
            std::uint32_t cmask = detail::clause_var_mask(cnf.clauses[i]);
            std::vector<std::int64_t> scoeffs;
            std::vector<std::uint32_t> summands;
            for (std::uint32_t e : gp.parts[i]) {
                std::vector<std::uint32_t> factors;
                for (std::uint32_t v = 1; v <= cnf.n_vars; ++v) {
                    if (cmask & (1u << (v - 1))) continue;
                    factors.push_back(
                        detail::selector_node(c, (e >> (v - 1)) & 1u, v, one, have_one));
                }
                scoeffs.push_back(1);
                if (factors.empty()) {
                    if (!have_one) { one = c.add_const(1); have_one = true; }
                    summands.push_back(one);
                } else if (factors.size() == 1) {
                    summands.push_back(factors[0]);
                } else {
                    summands.push_back(c.add_prod(factors));
                }
            }
            g = summands.size() == 1 && scoeffs[0] == 1
                    ? summands[0]
                    : c.add_lin(std::move(scoeffs), std::move(summands));
        }
        coeffs.push_back(1);
        terms.push_back(c.add_prod({f, g}));
    }
    if (pad_boolean_axioms) {
        std::uint32_t zero = c.add_const(0);
        for (std::uint32_t v = 1; v <= cnf.n_vars; ++v) {
            std::uint32_t f = c.add_var(
                VarId::F(static_cast<std::uint32_t>(cnf.clauses.size()) + v));
            coeffs.push_back(1);
            terms.push_back(c.add_prod({f, zero}));
        }
    }
    if (terms.empty()) {
        c.outputs = {c.add_const(0)};
    } else {
        c.outputs = {c.add_lin(std::move(coeffs), std::move(terms))};
    }
    c.declared_xvars = cnf.n_vars;

    Certificate cert;
    cert.circuit = std::move(c);
    cert.system = translate(cnf, pad_boolean_axioms, modulus);
    cert.kind = CertKind::Refutation;
    return cert;
}

// The single summand S(f, e, x) whose sum over e in {0,1}^n equals the
// explicit certificate. The cube variables e_1..e_n appear as x_{n+1}..x_{2n}:
//   S = sum_i f_i * Fals_i(e) * prod_{j<i} (1 - Fals_j(e))
//             * prod_{v not in clause i} (e_v x_v + (1-e_v)(1-x_v)).
// Fals_i(e) is the clause-i polynomial evaluated on the e-block, which is 1
// exactly on the assignments that falsify clause i.
inline Circuit build_certificate_summand(const CnfFormula& cnf) {
    Circuit c;
    std::uint32_t one = c.add_const(1);
    auto evar = [&](std::uint32_t v) { return c.add_var(VarId::X(cnf.n_vars + v)); };

    // falsification indicator of one clause, on the e-block
    auto falsify = [&](const std::vector<std::int32_t>& clause) -> std::uint32_t {
        std::vector<std::uint32_t> factors;
        for (std::int32_t lit : clause) {
            std::uint32_t v = static_cast<std::uint32_t>(lit > 0 ? lit : -lit);
            std::uint32_t e = evar(v);
            factors.push_back(lit > 0 ? c.add_lin({1, -1}, {one, e}) : e);
        }
        if (factors.empty()) return one;
        if (factors.size() == 1) return factors[0];
        return c.add_prod(factors);
    };

    std::vector<std::uint32_t> fals;
    for (const auto& cl : cnf.clauses) fals.push_back(falsify(cl));

    std::vector<std::int64_t> coeffs;
    std::vector<std::uint32_t> terms;
    for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
        std::vector<std::uint32_t> factors;
        factors.push_back(c.add_var(VarId::F(static_cast<std::uint32_t>(i + 1))));
        factors.push_back(fals[i]);
        for (std::size_t j = 0; j < i; ++j)
            factors.push_back(c.add_lin({1, -1}, {one, fals[j]}));
        std::uint32_t cmask = detail::clause_var_mask(cnf.clauses[i]);
        for (std::uint32_t v = 1; v <= cnf.n_vars; ++v) {
            if (cmask & (1u << (v - 1))) continue;
            std::uint32_t e = evar(v);
            std::uint32_t x = c.add_var(VarId::X(v));
            std::uint32_t ex = c.add_prod({e, x});
            std::uint32_t ne = c.add_lin({1, -1}, {one, e});
            std::uint32_t nx = c.add_lin({1, -1}, {one, x});
            std::uint32_t nenx = c.add_prod({ne, nx});
            factors.push_back(c.add_lin({1, 1}, {ex, nenx}));
        }
        coeffs.push_back(1);
        terms.push_back(c.add_prod(factors));
    }
    if (terms.empty()) {
        c.outputs = {c.add_const(0)};
    } else {
        c.outputs = {c.add_lin(std::move(coeffs), std::move(terms))};
    }
    c.declared_xvars = 2 * cnf.n_vars;
    return c;
}

} // namespace ipskit
