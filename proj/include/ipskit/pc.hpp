#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ipskit/circuit_io.hpp"
#include "ipskit/cnf.hpp"
#include "ipskit/errors.hpp"
#include "ipskit/ips.hpp"
#include "ipskit/poly.hpp"

namespace ipskit {

// ---------------------------------------------------------------- proof object

// Lines reference strictly earlier lines; polynomials are recomputed during
// checking rather than stored.
struct PcLine {
    enum class Kind : std::uint8_t { Axiom, Lin, MulVar };
    Kind kind = Kind::Axiom;
    std::uint32_t axiom = 0;          // Axiom: 1-based equation index
    std::int64_t alpha = 0, beta = 0; // Lin: alpha*L_a + beta*L_b
    std::uint32_t a = 0, b = 0;       // Lin: 0-based line indices; MulVar uses a
    std::uint32_t var = 0;            // MulVar: 1-based x-variable index
};

struct PcProof {
    std::vector<PcLine> lines;
    std::uint32_t final = 0; // 0-based index of the concluding line
    std::string system_path; // optional provenance for serialized proofs
};

struct PcMeasures {
    std::size_t lines = 0;
    std::size_t monomials = 0; // total across all expanded lines
    std::uint64_t degree = 0;  // max total degree of any line
};

// ---------------------------------------------------------------- checking

namespace detail {

inline std::vector<SparsePoly> pc_line_polys(const PcProof& proof, const PolySystem& sys,
                                             const Caps& caps) {
    std::vector<SparsePoly> polys;
    polys.reserve(proof.lines.size());
    for (std::size_t k = 0; k < proof.lines.size(); ++k) {
        const PcLine& ln = proof.lines[k];
        SparsePoly p(sys.modulus);
        switch (ln.kind) {
        case PcLine::Kind::Axiom:
            if (ln.axiom == 0 || ln.axiom > sys.size())
                throw InvalidRule("line " + std::to_string(k + 1) + ": axiom index out of range");
            p = expand_circuit(sys.equations[ln.axiom - 1], caps, sys.modulus);
            break;
        case PcLine::Kind::Lin:
            if (ln.a >= k || ln.b >= k)
                throw InvalidRule("line " + std::to_string(k + 1) +
                                  ": linear combination references a later line");
            p = polys[ln.a].scaled(ln.alpha) + polys[ln.b].scaled(ln.beta);
            break;
        case PcLine::Kind::MulVar:
            if (ln.a >= k)
                throw InvalidRule("line " + std::to_string(k + 1) +
                                  ": multiplication references a later line");
            if (ln.var == 0) throw InvalidRule("line " + std::to_string(k + 1) + ": bad variable");
            p = polys[ln.a] * SparsePoly::variable(VarId::X(ln.var), sys.modulus);
            break;
        }
        p.enforce_caps(caps);
        polys.push_back(std::move(p));
    }
    return polys;
}

} // namespace detail

// Checks a refutation (final line must expand to 1) or, when `target` is
// given, a derivation of that polynomial. Returns line/monomial/degree
// measures on success.
inline PcMeasures check_pc(const PcProof& proof, const PolySystem& sys,
                           const Caps& caps = Caps{}, const SparsePoly* target = nullptr) {
    if (proof.lines.empty()) throw InvalidRule("empty proof");
    if (proof.final >= proof.lines.size()) throw InvalidRule("final line index out of range");
    std::vector<SparsePoly> polys = detail::pc_line_polys(proof, sys, caps);
    SparsePoly want =
        target ? *target : SparsePoly::constant(1, sys.modulus);
    if (!poly_equal(polys[proof.final], want))
        throw FinalNotOne("final line is " + polys[proof.final].str() + ", expected " + want.str());
    PcMeasures m;
    m.lines = proof.lines.size();
    for (const SparsePoly& p : polys) {
        m.monomials += p.terms().size();
        for (const auto& [mono, c] : p.terms())
            m.degree = std::max<std::uint64_t>(m.degree, mono.total_degree());
    }
    return m;
}

// ---------------------------------------------------------------- PC -> IPS

// Transcribes the proof into a circuit, replacing each axiom F_i with the
// placeholder f_i. Every multiplication gate pairs an earlier line with a
// fresh variable leaf, so the result is weakly skew and placeholder-linear.
inline Certificate compile_pc_to_ips(const PcProof& proof, const PolySystem& sys,
                                     const Caps& caps = Caps{},
                                     const SparsePoly* target = nullptr) {
    check_pc(proof, sys, caps, target); // throws if invalid
    Circuit c;
    std::vector<std::uint32_t> node_of;
    for (const PcLine& ln : proof.lines) {
        switch (ln.kind) {
        case PcLine::Kind::Axiom:
            node_of.push_back(c.add_var(VarId::F(ln.axiom)));
            break;
        case PcLine::Kind::Lin:
            node_of.push_back(c.add_lin({ln.alpha, ln.beta}, {node_of[ln.a], node_of[ln.b]}));
            break;
        case PcLine::Kind::MulVar: {
            std::uint32_t x = c.add_var(VarId::X(ln.var));
            node_of.push_back(c.add_prod({node_of[ln.a], x}));
            break;
        }
        }
    }
    c.outputs = {node_of[proof.final]};
    c.declared_xvars = sys.n_vars;
    Certificate cert;
    cert.circuit = std::move(c);
    cert.system = sys;
    if (target) {
        cert.kind = CertKind::Derivation;
        cert.target = poly_to_circuit(*target);
    } else {
        cert.kind = CertKind::Refutation;
    }
    return cert;
}

// ---------------------------------------------------------------- IPS -> PC

namespace detail {

// Builds a PC proof from a placeholder-linear weakly-skew circuit by
// structural recursion. For each node u we derive the line
//   D_u = p_u(x, F(x)) - p_u(x, 0)
// (zero for placeholder-free nodes, represented as "no line"), and multiply
// lines by placeholder-free subcircuits gate by gate. Lines are memoized so
// shared subcircuits are derived once.
struct PcBuilder {
    const Circuit& c;
    const PolySystem& sys;
    PcProof proof;
    std::map<std::uint32_t, std::uint32_t> axiom_line;        // placeholder -> line
    std::map<std::uint32_t, std::optional<std::uint32_t>> d_memo;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> m_memo;
    std::vector<char> has_f;

    explicit PcBuilder(const Circuit& circuit, const PolySystem& system)
        : c(circuit), sys(system) {
        has_f.resize(c.nodes.size(), 0);
        for (std::size_t i = 0; i < c.nodes.size(); ++i) {
            const Node& n = c.nodes[i];
            if (n.kind == NodeKind::Var && n.var.cls == VarId::Class::F) has_f[i] = 1;
            for (auto ch : n.children) has_f[i] |= has_f[ch];
        }
    }

    std::uint32_t emit(PcLine ln) {
        proof.lines.push_back(ln);
        return static_cast<std::uint32_t>(proof.lines.size() - 1);
    }

    std::uint32_t axiom(std::uint32_t i) {
        auto it = axiom_line.find(i);
        if (it != axiom_line.end()) return it->second;
        PcLine ln;
        ln.kind = PcLine::Kind::Axiom;
        ln.axiom = i;
        std::uint32_t L = emit(ln);
        axiom_line[i] = L;
        return L;
    }

    std::uint32_t lin(std::int64_t alpha, std::uint32_t a, std::int64_t beta, std::uint32_t b) {
        PcLine ln;
        ln.kind = PcLine::Kind::Lin;
        ln.alpha = alpha;
        ln.beta = beta;
        ln.a = a;
        ln.b = b;
        return emit(ln);
    }

    // line computing (polynomial of line L) * p_u, for placeholder-free u
    std::uint32_t mul_by(std::uint32_t L, std::uint32_t u) {
        auto key = std::make_pair(L, u);
        auto it = m_memo.find(key);
        if (it != m_memo.end()) return it->second;
        const Node& n = c.nodes[u];
        std::uint32_t out;
        switch (n.kind) {
        case NodeKind::Const:
            out = lin(n.cval, L, 0, L);
            break;
        case NodeKind::Var:
            if (n.var.cls == VarId::Class::F)
                throw NotHilbertLike("placeholder inside a multiplier subcircuit");
            {
                PcLine ln;
                ln.kind = PcLine::Kind::MulVar;
                ln.a = L;
                ln.var = n.var.index;
                out = emit(ln);
            }
            break;
        case NodeKind::Lin: {
            if (n.children.empty()) {
                out = lin(0, L, 0, L);
                break;
            }
            std::uint32_t acc = 0;
            bool have = false;
            for (std::size_t k = 0; k < n.children.size(); ++k) {
                std::uint32_t Mk = mul_by(L, n.children[k]);
                if (!have) {
                    acc = lin(n.coeffs[k], Mk, 0, Mk);
                    have = true;
                } else {
                    acc = lin(1, acc, n.coeffs[k], Mk);
                }
            }
            out = acc;
            break;
        }
        case NodeKind::Prod: {
            if (n.children.empty()) {
                out = lin(1, L, 0, L);
                break;
            }
            std::uint32_t acc = L;
            for (auto ch : n.children) acc = mul_by(acc, ch);
            out = acc;
            break;
        }
        case NodeKind::Div:
            throw InputError("division-free circuit required");
        }
        m_memo[key] = out;
        return out;
    }

    // line for D_u; nullopt when p_u is placeholder-free (D_u = 0)
    std::optional<std::uint32_t> derive(std::uint32_t u) {
        auto it = d_memo.find(u);
        if (it != d_memo.end()) return it->second;
        const Node& n = c.nodes[u];
        std::optional<std::uint32_t> out;
        if (!has_f[u]) {
            out = std::nullopt;
        } else {
            switch (n.kind) {
            case NodeKind::Var:
                out = axiom(n.var.index);
                break;
            case NodeKind::Lin: {
                std::uint32_t acc = 0;
                bool have = false;
                for (std::size_t k = 0; k < n.children.size(); ++k) {
                    auto Dk = derive(n.children[k]);
                    if (!Dk) continue;
                    if (!have) {
                        acc = lin(n.coeffs[k], *Dk, 0, *Dk);
                        have = true;
                    } else {
                        acc = lin(1, acc, n.coeffs[k], *Dk);
                    }
                }
                out = have ? std::optional<std::uint32_t>(acc) : std::nullopt;
                break;
            }
            case NodeKind::Prod: {
                if (n.children.size() != 2)
                    throw NonBinaryProduct("binarize products before compiling to PC");
                std::uint32_t v = n.children[0], w = n.children[1];
                if (has_f[v] && has_f[w])
                    throw NotHilbertLike("product of two placeholder-carrying subcircuits");
                if (has_f[v]) {
                    auto Dv = derive(v);
                    out = mul_by(*Dv, w);
                } else {
                    auto Dw = derive(w);
                    out = mul_by(*Dw, v);
                }
                break;
            }
            default:
                throw InputError("unexpected node kind while compiling to PC");
            }
        }
        d_memo[u] = out;
        return out;
    }
};

} // namespace detail

// Compiles a placeholder-linear (each monomial has placeholder degree exactly
// one) weakly-skew certificate into a PC proof of the same conclusion.
inline PcProof compile_ips_to_pc(const Certificate& cert, const Caps& caps = Caps{}) {
    if (!cert.circuit.division_free())
        throw InputError("division-free certificate required");
    if (!is_hilbert_like(cert, caps)) throw NotHilbertLike("certificate is not placeholder-linear");
    Circuit c = binarize_products(cert.circuit);
    WeaklySkewResult wsr = is_weakly_skew(c);
    if (!wsr.ok)
        throw NotWeaklySkew("product node " + std::to_string(wsr.offending_node) +
                            " has no isolated child");
    detail::PcBuilder b(c, cert.system);
    auto Dout = b.derive(c.outputs[0]);
    if (!Dout) throw NotHilbertLike("certificate contains no placeholder");
    b.proof.final = *Dout;
    return b.proof;
}

// ---------------------------------------------------------------- text format

inline void write_pcproof(std::ostream& os, const PcProof& proof) {
    os << "pcproof v1\n";
    if (!proof.system_path.empty()) os << "system " << proof.system_path << "\n";
    for (std::size_t k = 0; k < proof.lines.size(); ++k) {
        const PcLine& ln = proof.lines[k];
        os << "L" << (k + 1) << " ";
        switch (ln.kind) {
        case PcLine::Kind::Axiom:
            os << "axiom " << ln.axiom;
            break;
        case PcLine::Kind::Lin:
            os << "lin " << ln.alpha << " L" << (ln.a + 1) << " " << ln.beta << " L" << (ln.b + 1);
            break;
        case PcLine::Kind::MulVar:
            os << "mulvar L" << (ln.a + 1) << " x" << ln.var;
            break;
        }
        os << "\n";
    }
    os << "final L" << (proof.final + 1) << "\n";
}

inline std::string pcproof_to_string(const PcProof& proof) {
    std::ostringstream os;
    write_pcproof(os, proof);
    return os.str();
}

namespace detail {

inline std::uint32_t parse_line_ref(const std::string& tok, std::size_t limit) {
    if (tok.size() < 2 || tok[0] != 'L') throw ParseError("expected line reference, got " + tok);
    std::uint32_t k = static_cast<std::uint32_t>(std::stoul(tok.substr(1)));
    if (k == 0 || k > limit) throw ParseError("line reference out of range: " + tok);
    return k - 1;
}

} // namespace detail

inline PcProof parse_pcproof(std::istream& in) {
    PcProof proof;
    std::string raw;
    bool header = false;
    bool have_final = false;
    while (std::getline(in, raw)) {
        std::string line = detail::strip_comment(raw);
        if (line.empty()) continue;
        if (!header) {
            if (line != "pcproof v1") throw MalformedHeader("expected 'pcproof v1', got: " + line);
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "system") {
            ls >> proof.system_path;
            continue;
        }
        if (first == "final") {
            std::string ref;
            ls >> ref;
            proof.final = detail::parse_line_ref(ref, proof.lines.size());
            have_final = true;
            continue;
        }
        if (first.size() < 2 || first[0] != 'L')
            throw ParseError("unrecognized line: " + line);
        std::uint32_t id = static_cast<std::uint32_t>(std::stoul(first.substr(1)));
        if (id != proof.lines.size() + 1)
            throw ParseError("line ids must be sequential; expected L" +
                             std::to_string(proof.lines.size() + 1) + ", got " + first);
        std::string kind;
        ls >> kind;
        PcLine ln;
        if (kind == "axiom") {
            ln.kind = PcLine::Kind::Axiom;
            if (!(ls >> ln.axiom)) throw ParseError("bad axiom line: " + line);
        } else if (kind == "lin") {
            ln.kind = PcLine::Kind::Lin;
            std::string ra, rb;
            if (!(ls >> ln.alpha >> ra >> ln.beta >> rb)) throw ParseError("bad lin line: " + line);
            ln.a = detail::parse_line_ref(ra, proof.lines.size());
            ln.b = detail::parse_line_ref(rb, proof.lines.size());
        } else if (kind == "mulvar") {
            ln.kind = PcLine::Kind::MulVar;
            std::string ra, xv;
            if (!(ls >> ra >> xv)) throw ParseError("bad mulvar line: " + line);
            ln.a = detail::parse_line_ref(ra, proof.lines.size());
            if (xv.size() < 2 || xv[0] != 'x') throw ParseError("bad variable in: " + line);
            ln.var = static_cast<std::uint32_t>(std::stoul(xv.substr(1)));
            if (ln.var == 0) throw ParseError("variable indices are 1-based: " + line);
        } else {
            throw ParseError("unknown rule: " + kind);
        }
        proof.lines.push_back(ln);
    }
    if (!header) throw MalformedHeader("missing pcproof header");
    if (!have_final) throw ParseError("missing final line");
    return proof;
}

inline PcProof parse_pcproof(const std::string& text) {
    std::istringstream in(text);
    return parse_pcproof(in);
}

// ---------------------------------------------------------------- generator

// Implication-chain family: clauses (x1), (~x1 v x2), ..., (~x_{k-1} v x_k),
// (~x_k), with its natural PC refutation. `pad_to` appends redundant copy
// lines to reach a requested line count.
struct PcExample {
    CnfFormula cnf;
    PcProof proof;
};

inline PcExample chain_refutation(std::uint32_t k, std::size_t pad_to = 0) {
    if (k == 0) throw InputError("chain needs at least one variable");
    PcExample ex;
    ex.cnf.n_vars = k;
    ex.cnf.clauses.push_back({1});
    for (std::uint32_t i = 1; i < k; ++i)
        ex.cnf.clauses.push_back({-static_cast<std::int32_t>(i),
                                  static_cast<std::int32_t>(i + 1)});
    ex.cnf.clauses.push_back({-static_cast<std::int32_t>(k)});

    PcProof& p = ex.proof;
    auto emit = [&](PcLine ln) {
        p.lines.push_back(ln);
        return static_cast<std::uint32_t>(p.lines.size() - 1);
    };
    auto ax = [&](std::uint32_t i) {
        PcLine ln;
        ln.kind = PcLine::Kind::Axiom;
        ln.axiom = i;
        return emit(ln);
    };
    auto lin = [&](std::int64_t a, std::uint32_t la, std::int64_t b, std::uint32_t lb) {
        PcLine ln;
        ln.kind = PcLine::Kind::Lin;
        ln.alpha = a;
        ln.beta = b;
        ln.a = la;
        ln.b = lb;
        return emit(ln);
    };
    auto mul = [&](std::uint32_t la, std::uint32_t v) {
        PcLine ln;
        ln.kind = PcLine::Kind::MulVar;
        ln.a = la;
        ln.var = v;
        return emit(ln);
    };

    // invariant: `cur` computes 1 - x_i
    std::uint32_t cur = ax(1);
    for (std::uint32_t i = 1; i < k; ++i) {
        std::uint32_t t = mul(cur, i + 1);          // (1-x_i) x_{i+1}
        std::uint32_t s = lin(1, cur, -1, t);       // (1-x_i)(1-x_{i+1})
        std::uint32_t a = ax(i + 1);                // x_i (1-x_{i+1})
        cur = lin(1, s, 1, a);                      // 1 - x_{i+1}
    }
    std::uint32_t last = ax(k + 1);                 // x_k
    p.final = lin(1, cur, 1, last);                 // 1
    while (pad_to > p.lines.size()) {
        std::uint32_t f = p.final;
        p.final = lin(1, f, 0, f);
    }
    return ex;
}

} // namespace ipskit
