#pragma once

#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "ipskit/circuit.hpp"
#include "ipskit/errors.hpp"

namespace ipskit {

struct CnfFormula {
    std::uint32_t n_vars = 0;
    std::vector<std::vector<std::int32_t>> clauses; // nonzero signed indices
};

struct EquationProvenance {
    enum class Kind : std::uint8_t { Clause, BooleanAxiom, User };
    Kind kind = Kind::User;
    std::uint32_t index = 0; // clause number or variable number (1-based)
};

// The equations F_1,...,F_m (division-free circuits over X-variables only).
struct PolySystem {
    std::vector<Circuit> equations;
    std::vector<EquationProvenance> provenance;
    bool boolean_axioms_included = false;
    std::uint32_t n_vars = 0;     // ambient x-variable count
    std::uint64_t modulus = 0;    // 0 = integer mode

    std::size_t size() const { return equations.size(); }
};

// ---------------------------------------------------------------- DIMACS

inline CnfFormula parse_dimacs(std::istream& in) {
    CnfFormula cnf;
    std::string line;
    bool seen_header = false;
    std::size_t declared_clauses = 0;
    std::vector<std::int32_t> current;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == 'c') continue;
        if (line[0] == 'p') {
            std::istringstream hs(line);
            std::string p, fmt;
            long long n = -1, m = -1;
            hs >> p >> fmt >> n >> m;
            if (p != "p" || fmt != "cnf" || n < 0 || m < 0 || hs.fail())
                throw MalformedHeader("bad DIMACS header: " + line);
            cnf.n_vars = static_cast<std::uint32_t>(n);
            declared_clauses = static_cast<std::size_t>(m);
            seen_header = true;
            continue;
        }
        if (!seen_header) throw MalformedHeader("clause data before DIMACS header");
        std::istringstream ls(line);
        long long lit;
        while (ls >> lit) {
            if (lit == 0) {
                cnf.clauses.push_back(current);
                current.clear();
            } else {
                if (lit > static_cast<long long>(cnf.n_vars) ||
                    lit < -static_cast<long long>(cnf.n_vars))
                    throw LiteralOutOfRange("literal " + std::to_string(lit) + " exceeds n=" +
                                            std::to_string(cnf.n_vars));
                current.push_back(static_cast<std::int32_t>(lit));
            }
        }
    }
    if (!seen_header) throw MalformedHeader("missing DIMACS header");
    if (!current.empty())
        throw UnterminatedClause("clause not terminated by 0");
    if (cnf.clauses.size() != declared_clauses)
        throw UnterminatedClause("header declares " + std::to_string(declared_clauses) +
                                 " clauses, found " + std::to_string(cnf.clauses.size()));
    return cnf;
}

inline CnfFormula parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    return parse_dimacs(in);
}

// ---------------------------------------------------------------- translation

// Clause to polynomial: positive literal x contributes the factor (1-x),
// negative literal contributes x; the clause maps to the product, which
// vanishes at a {0,1} point exactly when the clause is satisfied there.
inline Circuit clause_circuit(const std::vector<std::int32_t>& clause) {
    Circuit c;
    std::uint32_t one = 0;
    bool have_one = false;
    std::vector<std::uint32_t> factors;
    for (std::int32_t lit : clause) {
        std::uint32_t idx = static_cast<std::uint32_t>(lit > 0 ? lit : -lit);
        std::uint32_t x = c.add_var(VarId::X(idx));
        if (lit > 0) {
            if (!have_one) { one = c.add_const(1); have_one = true; }
            factors.push_back(c.add_lin({1, -1}, {one, x}));
        } else {
            factors.push_back(x);
        }
    }
    if (factors.empty()) {
        // empty clause: unsatisfiable, constant 1
        c.outputs = {c.add_const(1)};
    } else if (factors.size() == 1) {
        c.outputs = {factors[0]};
    } else {
        c.outputs = {c.add_prod(factors)};
    }
    return c;
}

inline Circuit boolean_axiom_circuit(std::uint32_t var_index) {
    Circuit c;
    auto x = c.add_var(VarId::X(var_index));
    auto sq = c.add_prod({x, x});
    c.outputs = {c.add_lin({1, -1}, {sq, x})};
    return c;
}

inline PolySystem translate(const CnfFormula& cnf, bool include_boolean_axioms,
                            std::uint64_t modulus = 0) {
    PolySystem sys;
    sys.n_vars = cnf.n_vars;
    sys.modulus = modulus;
    sys.boolean_axioms_included = include_boolean_axioms;
    for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
        sys.equations.push_back(clause_circuit(cnf.clauses[i]));
        sys.provenance.push_back({EquationProvenance::Kind::Clause,
                                  static_cast<std::uint32_t>(i + 1)});
    }
    if (include_boolean_axioms) {
        for (std::uint32_t v = 1; v <= cnf.n_vars; ++v) {
            sys.equations.push_back(boolean_axiom_circuit(v));
            sys.provenance.push_back({EquationProvenance::Kind::BooleanAxiom, v});
        }
    }
    return sys;
}

// ---------------------------------------------------------------- helpers

inline bool clause_satisfied(const std::vector<std::int32_t>& clause, std::uint32_t assignment_mask) {
    for (std::int32_t lit : clause) {
        std::uint32_t idx = static_cast<std::uint32_t>(lit > 0 ? lit : -lit);
        bool v = (assignment_mask >> (idx - 1)) & 1u;
        if ((lit > 0 && v) || (lit < 0 && !v)) return true;
    }
    return false;
}

inline bool cnf_satisfiable(const CnfFormula& cnf, std::uint32_t* witness = nullptr) {
    if (cnf.n_vars > 24) throw CubeTooLarge("exhaustive satisfiability limited to n <= 24");
    for (std::uint64_t a = 0; a < (1ull << cnf.n_vars); ++a) {
        bool ok = true;
        for (const auto& cl : cnf.clauses)
            if (!clause_satisfied(cl, static_cast<std::uint32_t>(a))) { ok = false; break; }
        if (ok) {
            if (witness) *witness = static_cast<std::uint32_t>(a);
            return true;
        }
    }
    return false;
}

} // namespace ipskit
