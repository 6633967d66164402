#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipskit/errors.hpp"
#include "ipskit/field.hpp"

namespace ipskit {

// Variable identity: X(i) are the ambient variables x_i, F(i) the placeholder
// variables f_i that later get substituted by the system's equations.
struct VarId {
    enum class Class : std::uint8_t { X, F };
    Class cls;
    std::uint32_t index; // 1-based

    static VarId X(std::uint32_t i) { return {Class::X, i}; }
    static VarId F(std::uint32_t i) { return {Class::F, i}; }

    friend bool operator==(const VarId& a, const VarId& b) {
        return a.cls == b.cls && a.index == b.index;
    }
    friend bool operator<(const VarId& a, const VarId& b) {
        if (a.cls != b.cls) return a.cls < b.cls;
        return a.index < b.index;
    }
    std::string str() const {
        return (cls == Class::X ? "x" : "f") + std::to_string(index);
    }
};

enum class NodeKind : std::uint8_t { Const, Var, Lin, Prod, Div };

struct Node {
    NodeKind kind;
    std::int64_t cval = 0;              // Const
    VarId var = VarId::X(1);            // Var
    std::vector<std::int64_t> coeffs;   // Lin, parallel to children
    std::vector<std::uint32_t> children;
};

struct CircuitMetrics {
    std::size_t size = 0;
    std::uint32_t depth = 0;
    std::uint64_t syntactic_degree_bound = 0;
    bool constant_free = true;
};

// Append-only DAG of algebraic gates. Children always precede parents.
class Circuit {
public:
    std::vector<Node> nodes;
    std::vector<std::uint32_t> outputs;
    std::uint32_t declared_xvars = 0; // 0 = derive from nodes
    std::uint32_t declared_fvars = 0;

    std::uint32_t add_const(std::int64_t v) {
        Node n; n.kind = NodeKind::Const; n.cval = v;
        nodes.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes.size() - 1);
    }
    std::uint32_t add_var(VarId v) {
        Node n; n.kind = NodeKind::Var; n.var = v;
        nodes.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes.size() - 1);
    }
    std::uint32_t add_lin(std::vector<std::int64_t> coeffs, std::vector<std::uint32_t> children) {
        if (children.empty() || coeffs.size() != children.size())
            throw InputError("lin node needs matching nonempty coefficient/child lists");
        check_children(children);
        Node n; n.kind = NodeKind::Lin; n.coeffs = std::move(coeffs); n.children = std::move(children);
        nodes.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes.size() - 1);
    }
    std::uint32_t add_prod(std::vector<std::uint32_t> children) {
        if (children.empty()) throw InputError("prod node needs at least one child");
        check_children(children);
        Node n; n.kind = NodeKind::Prod; n.children = std::move(children);
        nodes.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes.size() - 1);
    }
    std::uint32_t add_div(std::uint32_t num, std::uint32_t den) {
        check_children({num, den});
        Node n; n.kind = NodeKind::Div; n.children = {num, den};
        nodes.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes.size() - 1);
    }

    bool division_free() const {
        for (const auto& n : nodes)
            if (n.kind == NodeKind::Div) return false;
        return true;
    }

    std::uint32_t max_xvar() const { return max_var(VarId::Class::X); }
    std::uint32_t max_fvar() const { return max_var(VarId::Class::F); }
    std::uint32_t n_xvars() const { return std::max(declared_xvars, max_xvar()); }
    std::uint32_t n_fvars() const { return std::max(declared_fvars, max_fvar()); }

private:
    void check_children(const std::vector<std::uint32_t>& cs) const {
        for (auto c : cs)
            if (c >= nodes.size()) throw InputError("child index out of range");
    }
    std::uint32_t max_var(VarId::Class cls) const {
        std::uint32_t m = 0;
        for (const auto& n : nodes)
            if (n.kind == NodeKind::Var && n.var.cls == cls) m = std::max(m, n.var.index);
        return m;
    }
};

// ---------------------------------------------------------------- evaluate

inline std::vector<FieldElement> evaluate(const Circuit& c,
                                          const std::map<VarId, FieldElement>& assignment,
                                          const Prime& p) {
    const std::uint64_t mod = p.value();
    std::vector<FieldElement> vals(c.nodes.size(), FieldElement(0, mod));
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        switch (n.kind) {
        case NodeKind::Const:
            vals[i] = FieldElement::from_int(n.cval, mod);
            break;
        case NodeKind::Var: {
            auto it = assignment.find(n.var);
            if (it == assignment.end())
                throw UnassignedVariable("variable " + n.var.str() + " unassigned");
            if (it->second.p != mod) throw ModulusMismatch("assignment modulus differs");
            vals[i] = it->second;
            break;
        }
        case NodeKind::Lin: {
            FieldElement acc(0, mod);
            for (std::size_t k = 0; k < n.children.size(); ++k)
                acc = acc + FieldElement::from_int(n.coeffs[k], mod) * vals[n.children[k]];
            vals[i] = acc;
            break;
        }
        case NodeKind::Prod: {
            FieldElement acc(1, mod);
            for (auto ch : n.children) acc = acc * vals[ch];
            vals[i] = acc;
            break;
        }
        case NodeKind::Div: {
            FieldElement den = vals[n.children[1]];
            if (den.is_zero())
                throw DivisionByZero("zero denominator at node " + std::to_string(i));
            vals[i] = vals[n.children[0]] * fp_inverse(den);
            break;
        }
        }
    }
    std::vector<FieldElement> out;
    out.reserve(c.outputs.size());
    for (auto o : c.outputs) out.push_back(vals[o]);
    return out;
}

// ---------------------------------------------------------------- substitute

// Replaces bound Var nodes by one shared copy of each binding circuit
// (single-output). Unbound variables are untouched.
inline Circuit substitute(const Circuit& c, const std::map<VarId, Circuit>& bindings) {
    Circuit out;
    out.declared_xvars = c.declared_xvars;
    out.declared_fvars = c.declared_fvars;
    std::map<VarId, std::uint32_t> binding_root;
    for (const auto& [v, bc] : bindings) {
        if (bc.outputs.size() != 1)
            throw InputError("binding circuit must have exactly one output");
        std::uint32_t base = static_cast<std::uint32_t>(out.nodes.size());
        for (const Node& n : bc.nodes) {
            Node m = n;
            for (auto& ch : m.children) ch += base;
            out.nodes.push_back(std::move(m));
        }
        binding_root[v] = base + bc.outputs[0];
        out.declared_xvars = std::max(out.declared_xvars, bc.n_xvars());
    }
    std::vector<std::uint32_t> remap(c.nodes.size());
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        if (n.kind == NodeKind::Var) {
            auto it = binding_root.find(n.var);
            if (it != binding_root.end()) { remap[i] = it->second; continue; }
        }
        Node m = n;
        for (auto& ch : m.children) ch = remap[ch];
        out.nodes.push_back(std::move(m));
        remap[i] = static_cast<std::uint32_t>(out.nodes.size() - 1);
    }
    for (auto o : c.outputs) out.outputs.push_back(remap[o]);
    return out;
}

// ---------------------------------------------------------------- metrics

// Depth counts alternation blocks of unbounded fan-in gates: adjacent gates
// of the same kind merge into one layer, leaves are depth 0, and an affine
// combination of leaves is still depth 0 (it can be absorbed into the layer
// above, which is what unbounded fan-in buys).
inline std::uint32_t node_depth_table(const Circuit& c, std::vector<std::uint32_t>& d) {
    d.assign(c.nodes.size(), 0);
    std::uint32_t maxd = 0;
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        std::uint32_t di = 0;
        switch (n.kind) {
        case NodeKind::Const:
        case NodeKind::Var:
            di = 0; break;
        case NodeKind::Prod:
            for (auto ch : n.children) {
                std::uint32_t dc = c.nodes[ch].kind == NodeKind::Prod ? d[ch] : d[ch] + 1;
                di = std::max(di, dc);
            }
            break;
        case NodeKind::Lin:
            for (auto ch : n.children) {
                const NodeKind k = c.nodes[ch].kind;
                std::uint32_t dc;
                if (k == NodeKind::Lin) dc = d[ch];
                else if (k == NodeKind::Const || k == NodeKind::Var) dc = 0;
                else dc = d[ch] + 1;
                di = std::max(di, dc);
            }
            break;
        case NodeKind::Div:
            for (auto ch : n.children) di = std::max(di, d[ch] + 1);
            break;
        }
        d[i] = di;
        maxd = std::max(maxd, di);
    }
    std::uint32_t out_max = 0;
    for (auto o : c.outputs) out_max = std::max(out_max, d[o]);
    return c.outputs.empty() ? maxd : out_max;
}

inline CircuitMetrics metrics(const Circuit& c, bool want_degree = true) {
    CircuitMetrics m;
    m.size = c.nodes.size();
    std::vector<std::uint32_t> dt;
    m.depth = node_depth_table(c, dt);
    std::vector<std::uint64_t> deg(c.nodes.size(), 0);
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        switch (n.kind) {
        case NodeKind::Const:
            if (n.cval > 1 || n.cval < -1) m.constant_free = false;
            deg[i] = 0;
            break;
        case NodeKind::Var:
            deg[i] = 1;
            break;
        case NodeKind::Lin: {
            std::uint64_t d = 0;
            for (auto ch : n.children) d = std::max(d, deg[ch]);
            deg[i] = d;
            for (auto co : n.coeffs)
                if (co > 1 || co < -1) m.constant_free = false;
            break;
        }
        case NodeKind::Prod: {
            std::uint64_t d = 0;
            for (auto ch : n.children) d += deg[ch];
            deg[i] = d;
            break;
        }
        case NodeKind::Div:
            if (want_degree)
                throw DegreeOfDivision("degree bound undefined with division nodes");
            deg[i] = 0;
            break;
        }
    }
    if (want_degree) {
        std::uint64_t d = 0;
        if (c.outputs.empty()) {
            for (auto v : deg) d = std::max(d, v);
        } else {
            for (auto o : c.outputs) d = std::max(d, deg[o]);
        }
        m.syntactic_degree_bound = d;
    }
    return m;
}

// ---------------------------------------------------------------- transforms

// Extract the subcircuit reachable from one node as a standalone single-output circuit.
inline Circuit extract_subcircuit(const Circuit& c, std::uint32_t root) {
    std::vector<bool> keep(c.nodes.size(), false);
    std::vector<std::uint32_t> stack{root};
    keep[root] = true;
    while (!stack.empty()) {
        std::uint32_t i = stack.back(); stack.pop_back();
        for (auto ch : c.nodes[i].children)
            if (!keep[ch]) { keep[ch] = true; stack.push_back(ch); }
    }
    Circuit out;
    out.declared_xvars = c.declared_xvars;
    out.declared_fvars = c.declared_fvars;
    std::vector<std::uint32_t> remap(c.nodes.size(), 0);
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        if (!keep[i]) continue;
        Node m = c.nodes[i];
        for (auto& ch : m.children) ch = remap[ch];
        out.nodes.push_back(std::move(m));
        remap[i] = static_cast<std::uint32_t>(out.nodes.size() - 1);
    }
    out.outputs = {remap[root]};
    return out;
}

// Rewrite every product of fan-in > 2 into a left-folded chain of binary products.
inline Circuit binarize_products(const Circuit& c) {
    Circuit out;
    out.declared_xvars = c.declared_xvars;
    out.declared_fvars = c.declared_fvars;
    std::vector<std::uint32_t> remap(c.nodes.size());
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        Node m = c.nodes[i];
        for (auto& ch : m.children) ch = remap[ch];
        if (m.kind == NodeKind::Prod && m.children.size() > 2) {
            std::uint32_t acc = m.children[0];
            for (std::size_t k = 1; k < m.children.size(); ++k)
                acc = out.add_prod({acc, m.children[k]});
            remap[i] = acc;
        } else if (m.kind == NodeKind::Prod && m.children.size() == 1) {
            remap[i] = m.children[0];
        } else {
            out.nodes.push_back(std::move(m));
            remap[i] = static_cast<std::uint32_t>(out.nodes.size() - 1);
        }
    }
    for (auto o : c.outputs) out.outputs.push_back(remap[o]);
    return out;
}

// Propagate and prune constants (division-free circuits). Keeps semantics
// exactly; used to shrink coefficient circuits before transcription.
inline Circuit fold_constants(const Circuit& c) {
    if (!c.division_free()) throw InputError("fold_constants requires a division-free circuit");
    Circuit out;
    out.declared_xvars = c.declared_xvars;
    out.declared_fvars = c.declared_fvars;
    std::vector<std::uint32_t> remap(c.nodes.size());
    std::vector<std::optional<std::int64_t>> cv(c.nodes.size()); // known constant value
    std::map<std::int64_t, std::uint32_t> const_pool;
    auto emit_const = [&](std::int64_t v) {
        auto it = const_pool.find(v);
        if (it != const_pool.end()) return it->second;
        std::uint32_t idx = out.add_const(v);
        const_pool[v] = idx;
        return idx;
    };
    auto checked_mul = [](std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) throw IntegerOverflow("constant fold overflow");
        return r;
    };
    auto checked_add = [](std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw IntegerOverflow("constant fold overflow");
        return r;
    };
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        switch (n.kind) {
        case NodeKind::Const:
            cv[i] = n.cval;
            remap[i] = emit_const(n.cval);
            break;
        case NodeKind::Var:
            remap[i] = out.add_var(n.var);
            break;
        case NodeKind::Prod: {
            std::int64_t cpart = 1;
            std::vector<std::uint32_t> kids;
            bool zero = false;
            for (auto ch : n.children) {
                if (cv[ch]) {
                    cpart = checked_mul(cpart, *cv[ch]);
                    if (cpart == 0) { zero = true; break; }
                } else {
                    kids.push_back(remap[ch]);
                }
            }
            if (zero || kids.empty()) {
                std::int64_t v = zero ? 0 : cpart;
                cv[i] = v;
                remap[i] = emit_const(v);
            } else if (cpart == 1 && kids.size() == 1) {
                remap[i] = kids[0];
            } else if (cpart == 1) {
                remap[i] = out.add_prod(kids);
            } else {
                std::uint32_t prod = kids.size() == 1 ? kids[0] : out.add_prod(kids);
                remap[i] = out.add_lin({cpart}, {prod});
            }
            break;
        }
        case NodeKind::Lin: {
            std::int64_t cpart = 0;
            std::vector<std::int64_t> coeffs;
            std::vector<std::uint32_t> kids;
            for (std::size_t k = 0; k < n.children.size(); ++k) {
                auto ch = n.children[k];
                if (n.coeffs[k] == 0) continue;
                if (cv[ch]) {
                    cpart = checked_add(cpart, checked_mul(n.coeffs[k], *cv[ch]));
                } else {
                    coeffs.push_back(n.coeffs[k]);
                    kids.push_back(remap[ch]);
                }
            }
            if (kids.empty()) {
                cv[i] = cpart;
                remap[i] = emit_const(cpart);
            } else if (cpart == 0 && kids.size() == 1 && coeffs[0] == 1) {
                remap[i] = kids[0];
            } else {
                if (cpart != 0) {
                    coeffs.push_back(cpart);
                    kids.push_back(emit_const(1));
                }
                remap[i] = out.add_lin(coeffs, kids);
            }
            break;
        }
        case NodeKind::Div:
            break; // unreachable, checked above
        }
    }
    for (auto o : c.outputs) out.outputs.push_back(remap[o]);
    if (!out.outputs.empty()) {
        Circuit trimmed = extract_subcircuit(out, out.outputs[0]);
        if (c.outputs.size() == 1) return trimmed;
    }
    return out;
}

// ---------------------------------------------------------------- weakly skew

struct WeaklySkewResult {
    bool ok = false;
    // For each binary product node: which child (0 or 1) is isolated.
    std::map<std::uint32_t, int> isolated_child;
    std::uint32_t offending_node = 0;
};

// A product gate's child is isolated when the child's subcircuit touches the
// rest of the DAG only through that one product edge.
inline WeaklySkewResult is_weakly_skew(const Circuit& c) {
    for (const auto& n : c.nodes)
        if (n.kind == NodeKind::Prod && n.children.size() != 2)
            throw NonBinaryProduct("is_weakly_skew requires binary products; binarize first");
    WeaklySkewResult res;
    res.ok = true;
    std::vector<bool> is_output(c.nodes.size(), false);
    for (auto o : c.outputs) is_output[o] = true;
    auto descendants = [&](std::uint32_t root) {
        std::vector<bool> in(c.nodes.size(), false);
        std::vector<std::uint32_t> stack{root};
        in[root] = true;
        while (!stack.empty()) {
            std::uint32_t i = stack.back(); stack.pop_back();
            for (auto ch : c.nodes[i].children)
                if (!in[ch]) { in[ch] = true; stack.push_back(ch); }
        }
        return in;
    };
    for (std::uint32_t g = 0; g < c.nodes.size(); ++g) {
        if (c.nodes[g].kind != NodeKind::Prod) continue;
        bool found = false;
        for (int slot = 1; slot >= 0 && !found; --slot) {
            std::uint32_t child = c.nodes[g].children[slot];
            auto in = descendants(child);
            bool isolated = true;
            for (std::uint32_t s = 0; s < c.nodes.size() && isolated; ++s)
                if (in[s] && is_output[s]) isolated = false;
            int external_edges = 0;
            for (std::uint32_t q = 0; q < c.nodes.size() && isolated; ++q) {
                if (in[q]) continue;
                for (std::size_t k = 0; k < c.nodes[q].children.size(); ++k) {
                    std::uint32_t s = c.nodes[q].children[k];
                    if (!in[s]) continue;
                    if (q == g && s == child && static_cast<int>(k) == slot) {
                        ++external_edges;
                    } else {
                        isolated = false;
                        break;
                    }
                }
            }
            if (isolated && external_edges == 1) {
                res.isolated_child[g] = slot;
                found = true;
            }
        }
        if (!found) {
            res.ok = false;
            res.offending_node = g;
            res.isolated_child.clear();
            return res;
        }
    }
    return res;
}

// ---------------------------------------------------------------- division split

namespace detail {
inline std::uint32_t combine_prod(Circuit& b, const std::vector<std::uint32_t>& factors,
                                  std::uint32_t ONE) {
    std::vector<std::uint32_t> real;
    for (auto f : factors)
        if (f != ONE) real.push_back(f);
    if (real.empty()) return ONE;
    if (real.size() == 1) return real[0];
    return b.add_prod(real);
}
} // namespace detail

// Pull all divisions to one top-level quotient: returns (num, den) division-free
// circuits with c = num/den wherever no intermediate denominator vanishes.
inline std::pair<Circuit, Circuit> split_division(const Circuit& c) {
    if (c.outputs.size() != 1) throw InputError("split_division requires a single output");
    Circuit b; // shared builder holding both results
    b.declared_xvars = c.declared_xvars;
    b.declared_fvars = c.declared_fvars;
    const std::uint32_t ONE = b.add_const(1);
    std::vector<std::uint32_t> num(c.nodes.size()), den(c.nodes.size());
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& n = c.nodes[i];
        switch (n.kind) {
        case NodeKind::Const:
            num[i] = b.add_const(n.cval);
            den[i] = ONE;
            break;
        case NodeKind::Var:
            num[i] = b.add_var(n.var);
            den[i] = ONE;
            break;
        case NodeKind::Div:
            num[i] = detail::combine_prod(b, {num[n.children[0]], den[n.children[1]]}, ONE);
            den[i] = detail::combine_prod(b, {den[n.children[0]], num[n.children[1]]}, ONE);
            break;
        case NodeKind::Prod: {
            std::vector<std::uint32_t> ns, ds;
            for (auto ch : n.children) { ns.push_back(num[ch]); ds.push_back(den[ch]); }
            num[i] = detail::combine_prod(b, ns, ONE);
            den[i] = detail::combine_prod(b, ds, ONE);
            break;
        }
        case NodeKind::Lin: {
            bool trivial = true;
            for (auto ch : n.children)
                if (den[ch] != ONE) trivial = false;
            if (trivial) {
                std::vector<std::uint32_t> ns;
                for (auto ch : n.children) ns.push_back(num[ch]);
                num[i] = b.add_lin(n.coeffs, ns);
                den[i] = ONE;
                break;
            }
            const std::size_t k = n.children.size();
            // prefix[j] = product of dens of children [0, j); suffix[j] = of (j, k)
            std::vector<std::uint32_t> prefix(k + 1), suffix(k + 1);
            prefix[0] = ONE;
            for (std::size_t j = 0; j < k; ++j)
                prefix[j + 1] = detail::combine_prod(b, {prefix[j], den[n.children[j]]}, ONE);
            suffix[k] = ONE;
            for (std::size_t j = k; j-- > 0;)
                suffix[j] = detail::combine_prod(b, {den[n.children[j]], suffix[j + 1]}, ONE);
            std::vector<std::uint32_t> terms;
            for (std::size_t j = 0; j < k; ++j)
                terms.push_back(detail::combine_prod(b, {num[n.children[j]], prefix[j], suffix[j + 1]}, ONE));
            num[i] = b.add_lin(n.coeffs, terms);
            den[i] = prefix[k];
            break;
        }
        }
    }
    const std::uint32_t root = c.outputs[0];
    return {extract_subcircuit(b, num[root]), extract_subcircuit(b, den[root])};
}

} // namespace ipskit
