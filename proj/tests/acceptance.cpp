// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Each criterion is independent and uses its own fixed seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "ipskit/cnf.hpp"
#include "ipskit/frege.hpp"
#include "ipskit/grobner.hpp"
#include "ipskit/ips.hpp"
#include "ipskit/pc.hpp"
#include "ipskit/propenc.hpp"
#include "ipskit/vnp.hpp"

using namespace ipskit;
using namespace th;

namespace {

struct Failure {
    std::string detail;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

// ---- shared random-CNF machinery ------------------------------------------

// A 3CNF with distinct variables in every clause.
CnfFormula random_3cnf(RandomSource& rng, std::uint32_t n, std::size_t m) {
    CnfFormula cnf;
    cnf.n_vars = n;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::uint32_t> vars;
        while (vars.size() < 3) {
            const std::uint32_t v = 1 + static_cast<std::uint32_t>(rng.next_below(n));
            bool dup = false;
            for (std::uint32_t u : vars) dup = dup || u == v;
            if (!dup) vars.push_back(v);
        }
        std::vector<std::int32_t> clause;
        for (std::uint32_t v : vars)
            clause.push_back(rng.next_below(2) ? static_cast<std::int32_t>(v)
                                               : -static_cast<std::int32_t>(v));
        cnf.clauses.push_back(clause);
    }
    return cnf;
}

bool satisfiable(const CnfFormula& cnf) {
    for (std::uint32_t mask = 0; mask < (1u << cnf.n_vars); ++mask) {
        bool all = true;
        for (const auto& clause : cnf.clauses) {
            bool sat = false;
            for (std::int32_t lit : clause) {
                const bool val = (mask >> (std::abs(lit) - 1)) & 1u;
                if ((lit > 0) == val) { sat = true; break; }
            }
            if (!sat) { all = false; break; }
        }
        if (all) return true;
    }
    return false;
}

// Certificates of the unsatisfiable corpus instances, reused by criterion 5
// for the perfect-completeness count.
std::vector<Certificate> g_unsat_certs;

// ---- criteria ---------------------------------------------------------------

// Sum over the Boolean cube of selector products expands exactly to 1.
void criterion1() {
    for (int n = 1; n <= 12; ++n) {
        SparsePoly acc;
        for (std::uint32_t e = 0; e < (1u << n); ++e) {
            SparsePoly prod = K(1);
            for (int i = 1; i <= n; ++i)
                prod = prod * (((e >> (i - 1)) & 1u) ? X(i) : K(1) - X(i));
            acc = acc + prod;
        }
        expect(poly_equal(acc, K(1)), "sum is not 1 at n = " + std::to_string(n));
    }
}

// Explicit certificate construction is sound and complete on random 3CNFs.
void criterion2() {
    RandomSource rng(202);
    std::size_t n_sat = 0, n_unsat = 0;
    for (int inst = 0; inst < 200; ++inst) {
        // Alternate sparse wide instances (usually satisfiable) with dense
        // narrow ones (usually not) so both branches are exercised.
        CnfFormula cnf;
        if (inst % 2 == 0) {
            const std::uint32_t n = 3 + static_cast<std::uint32_t>(rng.next_below(8));
            cnf = random_3cnf(rng, n, 1 + rng.next_below(25));
        } else {
            const std::uint32_t n = 3 + static_cast<std::uint32_t>(rng.next_below(3));
            cnf = random_3cnf(rng, n, std::min<std::size_t>(25, 4 * n + rng.next_below(10)));
        }
        Certificate cert = build_certificate_explicit(cnf);
        Verdict v = verify_exact(cert);
        if (satisfiable(cnf)) {
            ++n_sat;
            expect(!v.accepted, "satisfiable instance accepted");
            expect(v.failure_condition == 2,
                   "satisfiable instance failed condition " +
                       std::to_string(v.failure_condition) + ", expected 2");
        } else {
            ++n_unsat;
            expect(v.accepted, "unsatisfiable instance rejected");
            expect(is_hilbert_like(cert), "certificate is not placeholder-linear");
            expect(metrics(cert.circuit, false).constant_free,
                   "certificate is not constant-free");
            g_unsat_certs.push_back(std::move(cert));
        }
    }
    expect(n_sat > 0 && n_unsat > 0, "corpus is degenerate");
}

// Refutation-calculus proofs compile to small verified circuits and back.
void criterion3() {
    auto ax = [](std::uint32_t i) { PcLine l; l.kind = PcLine::Kind::Axiom; l.axiom = i; return l; };
    auto lin = [](std::int64_t al, std::uint32_t a, std::int64_t be, std::uint32_t b) {
        PcLine l; l.kind = PcLine::Kind::Lin; l.alpha = al; l.a = a; l.beta = be; l.b = b; return l;
    };
    auto mul = [](std::uint32_t a, std::uint32_t var) {
        PcLine l; l.kind = PcLine::Kind::MulVar; l.a = a; l.var = var; return l;
    };

    std::vector<std::pair<PcProof, PolySystem>> corpus;
    {
        // Hand-written: 1 - x1 and x1 combine linearly to 1.
        PolySystem sys = make_system({K(1) - X(1), X(1)}, 1);
        PcProof p;
        p.lines = {ax(1), ax(2), lin(1, 0, 1, 1)};
        p.final = 2;
        corpus.push_back({p, sys});
    }
    {
        // Hand-written: multiply 1 - x2 by x1, add x1*x2 - 1 to get x1 - 1,
        // then subtract it from the axiom x1.
        PolySystem sys = make_system({K(1) - X(2), X(1) * X(2) - K(1), X(1)}, 2);
        PcProof p;
        p.lines = {ax(1), mul(0, 1), ax(2), lin(1, 1, 1, 2), ax(3), lin(1, 4, -1, 3)};
        p.final = 5;
        corpus.push_back({p, sys});
    }
    RandomSource rng(303);
    while (corpus.size() < 52) {
        CnfFormula cnf = random_3cnf(rng, 3, 16 + rng.next_below(9));
        if (satisfiable(cnf)) continue;
        Certificate cert = build_certificate_explicit(cnf);
        corpus.push_back({compile_ips_to_pc(cert), cert.system});
    }

    for (const auto& [proof, sys] : corpus) {
        PcMeasures m = check_pc(proof, sys); // throws if invalid
        Certificate cert = compile_pc_to_ips(proof, sys);
        expect(is_weakly_skew(cert.circuit).ok, "compiled circuit is not weakly skew");
        expect(is_hilbert_like(cert), "compiled circuit is not placeholder-linear");
        expect(verify_exact(cert).accepted, "compiled certificate rejected");
        expect(metrics(cert.circuit, false).size <= 3 * m.lines + sys.size(),
               "compiled circuit exceeds the size bound");
        PcProof back = compile_ips_to_pc(cert);
        check_pc(back, sys); // throws if invalid
        Certificate again = compile_pc_to_ips(back, sys);
        expect(poly_equal(expand_circuit(again.circuit), expand_circuit(cert.circuit)),
               "round trip changed the expansion");
    }
}

// Shallow sequent refutations compile depth-preservingly over F2.
void criterion4() {
    std::vector<FregeRefutation> family;
    {
        FregeRefutation ref;
        ref.cnf.n_vars = 1;
        ref.cnf.clauses = {{1}, {-1}};
        Cedent c1, c2, c3;
        c1.sucs = {BoolFormula::mkvar(1)};
        c1.by.rule = Justification::Rule::InitialClause;
        c1.by.clause = 1;
        c2.sucs = {BoolFormula::mknot(BoolFormula::mkvar(1))};
        c2.by.rule = Justification::Rule::InitialClause;
        c2.by.clause = 2;
        c3.by.rule = Justification::Rule::Cut;
        c3.by.p1 = 0;
        c3.by.p2 = 1;
        ref.cedents = {c1, c2, c3};
        family.push_back(ref);
    }
    for (std::uint32_t d = 1; d <= 3; ++d) family.push_back(or_tower_refutation(d));
    family.push_back(parity_refutation());

    for (const FregeRefutation& ref : family) {
        FregeCheck fc = check_frege(ref);
        Certificate cert = compile_frege_to_ips(ref);
        expect(verify_exact(cert).accepted, "compiled certificate rejected");
        expect(cert.system.modulus == 2, "certificate is not over F2");
        expect(metrics(cert.circuit, false).depth <= fc.depth + 2,
               "depth " + std::to_string(metrics(cert.circuit, false).depth) +
                   " exceeds proof depth " + std::to_string(fc.depth) + " plus 2");
    }
}

// The randomized identity test has the advertised per-trial error and never
// rejects a valid certificate.
void criterion5() {
    constexpr std::uint64_t p = 10007;
    constexpr int trials = 100000;
    PolySystem sys;
    sys.n_vars = 1;
    sys.modulus = p;
    Circuit one;
    one.outputs = {one.add_const(1)};
    sys.equations = {one};
    sys.provenance.push_back({EquationProvenance::Kind::User, 1});
    // f1 * prod_{k=1..8} (x1 - k): substituting f1 = 1 leaves a nonzero
    // degree-8 polynomial with exactly 8 roots in the field.
    SparsePoly body = F(1, p);
    for (int k = 1; k <= 8; ++k) body = body * (X(1, p) - K(k, p));
    Circuit c = poly_to_circuit(body);

    RandomSource rng(505);
    RandomizedOptions opt;
    opt.trials = 1;
    opt.prime = p;
    int false_zero = 0;
    for (int t = 0; t < trials; ++t)
        if (is_zero_certificate_randomized(c, sys, rng, opt)) ++false_zero;
    const double q0 = 8.0 / static_cast<double>(p);
    const double bound = q0 + 3.0 * std::sqrt(q0 * (1.0 - q0) / trials);
    const double rate = static_cast<double>(false_zero) / trials;
    expect(rate <= bound, "false-zero rate " + std::to_string(rate) + " exceeds " +
                              std::to_string(bound));
    expect(false_zero > 0, "no false zeros at all; the sampler looks broken");

    expect(!g_unsat_certs.empty(), "criterion 2 corpus is unavailable");
    RandomSource rng2(506);
    RandomizedOptions opt2;
    opt2.trials = 20;
    for (const Certificate& cert : g_unsat_certs)
        expect(verify_randomized(cert, rng2, opt2).accepted,
               "a valid certificate was rejected");
}

// hilbertize lands in the placeholder-linear fragment and keeps the target.
void criterion6() {
    PolySystem sys = make_system({X(1) * X(1), X(1) * X(2) - K(1), X(2) + X(3)}, 3);
    RandomSource rng(606);
    auto rand_poly = [&](bool force_quadratic) {
        SparsePoly c;
        const std::size_t n_mono = 1 + rng.next_below(10);
        for (std::size_t t = 0; t < n_mono; ++t) {
            SparsePoly mono = K(1 + static_cast<std::int64_t>(rng.next_below(3)));
            if (rng.next_below(2)) mono = mono.negated();
            const std::size_t fdeg =
                (force_quadratic && t == 0) ? 2 + rng.next_below(2) : 1 + rng.next_below(3);
            for (std::size_t j = 0; j < fdeg; ++j)
                mono = mono * F(1 + static_cast<int>(rng.next_below(3)));
            const std::size_t xdeg = rng.next_below(3);
            for (std::size_t j = 0; j < xdeg; ++j)
                mono = mono * X(1 + static_cast<int>(rng.next_below(3)));
            c = c + mono;
        }
        return c;
    };
    int produced = 0;
    while (produced < 50) {
        Certificate cert;
        cert.circuit = poly_to_circuit(rand_poly(true));
        cert.system = sys;
        cert.kind = CertKind::Derivation;
        std::map<VarId, Circuit> bind;
        for (std::size_t i = 0; i < sys.equations.size(); ++i)
            bind[VarId::F(static_cast<std::uint32_t>(i + 1))] = sys.equations[i];
        cert.target = substitute(cert.circuit, bind);
        if (is_hilbert_like(cert)) continue; // want genuinely nonlinear inputs
        expect(verify_exact(cert).accepted, "constructed derivation rejected");
        Certificate lin = hilbertize(cert);
        expect(is_hilbert_like(lin), "hilbertize output is not placeholder-linear");
        expect(verify_exact(lin).accepted, "hilbertized certificate rejected");
        ++produced;
    }
}

// The ideal engine: membership, radical membership, syzygies, and geometric
// certificates on the canonical small examples.
void criterion7() {
    constexpr std::uint64_t p = 10007;
    const std::vector<SparsePoly> in = {X(1, p) * X(1, p), X(1, p) * X(2, p)};
    GroebnerBasis basis = buchberger(in, MonoOrder::GrevLex, false);
    expect(!ideal_membership(X(1, p), basis).member, "x should not be in (x^2, xy)");
    expect(radical_membership(X(1, p), in), "x should be in the radical of (x^2, xy)");

    SyzygyGenerators s = syzygy_generators(in, MonoOrder::GrevLex);
    expect(in_syzygy_module({X(2, p), X(1, p).negated()}, s),
           "(y, -x) does not reduce to zero");
    for (const ModuleElem& z : s.generators) {
        SparsePoly residual(p);
        for (std::size_t i = 0; i < z.size(); ++i) residual = residual + z[i] * in[i];
        expect(residual.is_zero(), "emitted syzygy has a nonzero residual");
    }

    for (PolySystem sys : {make_system({X(1, p), X(1, p) - K(1, p)}, 1, p),
                           translate(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"), true, p)}) {
        std::optional<Certificate> cert = geometric_refutation(sys);
        expect(cert.has_value(), "geometric certificate not found");
        expect(verify_exact(*cert).accepted, "geometric certificate rejected");
    }
    PolySystem no = make_system({X(1, p) * X(2, p) - K(1, p), X(1, p) * X(1, p) * X(2, p)}, 2, p);
    expect(!geometric_refutation(no).has_value(),
           "found a certificate that should not exist without division");
}

// Division elimination on the 2x2 inversion principle.
void criterion8() {
    InversionSetup s = inversion_setup(0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            Certificate out = rips_to_ips(s.num[a][b], s.den, s.inverse_cert,
                                          poly_to_circuit(s.target[a][b]));
            expect(out.circuit.division_free(), "output uses division");
            expect(verify_exact(out).accepted, "division-free derivation rejected");
        }
}

// Bit-encoding sizes and evaluator collapse.
void criterion9() {
    RandomSource rng(909);
    auto clog2 = [](std::uint32_t v) {
        std::uint32_t w = 0;
        while ((1u << w) < v) ++w;
        return w;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.next_below(60));
        const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.next_below(40));
        CnfFormula cnf;
        cnf.n_vars = n;
        for (std::uint32_t i = 0; i < m; ++i) {
            std::vector<std::int32_t> clause;
            for (int j = 0; j < 3; ++j) {
                std::int32_t lit = 1 + static_cast<std::int32_t>(rng.next_below(n));
                clause.push_back(rng.next_below(2) ? lit : -lit);
            }
            cnf.clauses.push_back(clause);
        }
        expect(encode_clause_bits(cnf).bits.size() == 3ull * m * (clog2(n) + 1),
               "clause encoding has the wrong length");
    }
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.next_below(7));
        std::vector<std::int32_t> clause;
        for (int j = 0; j < 3; ++j) {
            std::int32_t lit = 1 + static_cast<std::int32_t>(rng.next_below(n));
            clause.push_back(rng.next_below(2) ? lit : -lit);
        }
        CnfFormula cnf;
        cnf.n_vars = n;
        cnf.clauses = {clause};
        BoolFormula bound =
            simplify_constants(bind_truth_bool(build_truth_bool(n, 1), n, encode_clause_bits(cnf)));
        std::vector<BoolFormula> lits;
        for (std::int32_t lit : clause) {
            BoolFormula v = BoolFormula::mkvar(static_cast<std::uint32_t>(std::abs(lit)));
            lits.push_back(lit > 0 ? v : BoolFormula::mknot(v));
        }
        expect(bound == BoolFormula::mkor(std::move(lits)),
               "bound evaluator is not structurally the clause");
    }
}

// The four identity-test axioms are exhaustively true at toy widths.
void criterion10() {
    {
        CircuitLayout lay{1, 3};
        PitStatement st = pit_axiom_statement(1, bruteforce_k_factory(2), lay);
        expect(st.n_free <= 20, "axiom 1 instance too wide");
        expect(statement_tautology(st), "axiom 1 instance is falsifiable");
    }
    {
        CircuitLayout lay{1, 2};
        PitStatement st = pit_axiom_statement(2, bruteforce_k_factory(3), lay);
        expect(statement_tautology(st), "axiom 2 instance is falsifiable");
    }
    {
        CircuitLayout layc{1, 1}, layg{1, 1};
        PitAxiomOptions opts;
        opts.g_layout = &layg;
        opts.position = 1;
        PitStatement st = pit_axiom_statement(3, bruteforce_k_factory(3), layc, opts);
        expect(statement_tautology(st), "axiom 3 instance is falsifiable");
    }
    {
        CircuitLayout lay{2, 2};
        PitAxiomOptions opts;
        opts.permutation = {2, 1};
        PitStatement st = pit_axiom_statement(4, bruteforce_k_factory(3), lay, opts);
        expect(statement_tautology(st), "axiom 4 instance is falsifiable");
    }
}

} // namespace

int main() {
    struct Entry {
        const char* name;
        void (*run)();
    };
    const Entry entries[] = {
        {"partition of unity", criterion1},
        {"explicit certificate soundness and completeness", criterion2},
        {"line-calculus and circuit-certificate equivalence", criterion3},
        {"depth-preserving sequent compilation", criterion4},
        {"randomized verifier statistics", criterion5},
        {"hilbertize", criterion6},
        {"ideal engine", criterion7},
        {"division elimination", criterion8},
        {"encoding fidelity", criterion9},
        {"identity-test axiom tautologies", criterion10},
    };
    int failures = 0;
    int idx = 0;
    for (const Entry& e : entries) {
        ++idx;
        std::string verdict = "PASS";
        try {
            e.run();
        } catch (const Failure& f) {
            verdict = "FAIL (" + f.detail + ")";
        } catch (const std::exception& ex) {
            verdict = std::string("FAIL (unexpected: ") + ex.what() + ")";
        }
        if (verdict != "PASS") ++failures;
        std::printf("criterion %d (%s): %s\n", idx, e.name, verdict.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
