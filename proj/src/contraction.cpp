#include "rha/contraction.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace rha {

std::string to_string(const Bg13Region& r) {
    switch (r.kind) {
        case Bg13Kind::zero_stay: return "0=";
        case Bg13Kind::zero_leave: return "0+";
        case Bg13Kind::point: return "[" + std::to_string(r.a) + "]";
        case Bg13Kind::open: return "(" + std::to_string(r.a - 1) + "," + std::to_string(r.a) + ")";
        case Bg13Kind::top: return "(" + std::to_string(r.a) + ",inf)";
    }
    return "?";
}

Bg13Region bg13_region(const Rational& v, std::int64_t cmax, bool leaves_zero) {
    if (v.sign() == 0) return {leaves_zero ? Bg13Kind::zero_leave : Bg13Kind::zero_stay, 0};
    if (v > Rational(static_cast<long>(cmax))) return {Bg13Kind::top, cmax};
    const auto fl = v.floor().get_si();
    if (v.is_integer()) return {Bg13Kind::point, fl};
    return {Bg13Kind::open, fl + 1};
}

AnnotatedRun annotate_bg13(const Model& m, const Run& run, std::int64_t cmax) {
    require_by_reference(m);
    AnnotatedRun ar{run, {}, {}, cmax};
    const std::size_t n = run.steps.size();
    for (std::size_t k = 0; k <= n; ++k) {
        const Configuration& c = run.config(k);
        AnnotatedConfig a{ctxloc_of(c), {}};
        for (std::size_t x = 0; x < m.nvars(); ++x) {
            bool leaves = false;
            if (k < n && c.val[x].sign() == 0) leaves = run.steps[k].delay.sign() > 0 && m.attr(c.loc).rate[x] > 0;
            a.regions.push_back(bg13_region(c.val[x], cmax, leaves));
        }
        ar.ann.push_back(std::move(a));
        if (k < n) {
            const auto& st = run.steps[k];
            ar.resets.push_back(st.kind == StepKind::edge && st.edge ? m.edges.at(*st.edge).reset : VarSet());
        }
    }
    return ar;
}

namespace {

std::vector<Fragment> cut(const Fragment& f, const std::set<std::size_t>& at) {
    std::vector<Fragment> out;
    std::size_t b = f.begin;
    for (auto k : at) {
        if (k <= b || k >= f.end) continue;
        out.push_back({b, k});
        b = k;
    }
    out.push_back({b, f.end});
    return out;
}

}  // namespace

SplitResult split_pipeline(const AnnotatedRun& ar, const Rational& T, std::int64_t rmax) {
    const Run& r = ar.run;
    if (r.duration() > T) throw std::invalid_argument("run duration exceeds the bound");
    const std::size_t n = r.steps.size();
    const Rational rate(static_cast<long>(std::max<std::int64_t>(rmax, 1)));
    std::vector<mpz_class> window{0};
    Rational elapsed;
    for (const auto& s : r.steps) {
        elapsed = elapsed + s.delay;
        window.push_back((elapsed * rate).floor());
    }
    SplitResult out;
    std::set<std::size_t> c1;
    for (std::size_t k = 1; k <= n; ++k)
        if (window[k] != window[k - 1]) c1.insert(k);
    out.type1 = cut({0, n}, c1);

    const std::size_t nv = ar.ann.empty() ? 0 : ar.ann[0].regions.size();
    for (const auto& f : out.type1) {
        std::set<std::size_t> c2;
        for (std::size_t k = f.begin + 1; k <= f.end; ++k)
            if (ar.ann[k].regions != ar.ann[k - 1].regions) c2.insert(k);
        for (const auto& g : cut(f, c2)) {
            out.type2.push_back(g);
            std::set<std::size_t> c3;
            for (std::size_t x = 0; x < nv; ++x) {
                std::optional<std::size_t> first;
                std::optional<std::size_t> last;
                for (std::size_t k = g.begin + 1; k <= g.end; ++k) {
                    if (!ar.resets[k - 1].contains(static_cast<VarIndex>(x))) continue;
                    if (!first) first = k;
                    last = k;
                }
                if (first) c3.insert(*first);
                if (last) c3.insert(*last);
            }
            for (const auto& h : cut(g, c3)) out.type3.push_back(h);
        }
    }
    return out;
}

CntSeq make_seq(std::vector<std::size_t> keys, std::vector<std::size_t> steps, std::vector<Rational> delays) {
    if (steps.size() + 1 != keys.size() || delays.size() != steps.size())
        throw std::invalid_argument("sequence shape mismatch");
    CntSeq s{std::move(keys), std::move(steps), std::move(delays), {}};
    for (std::size_t k = 0; k < s.keys.size(); ++k) s.origin.push_back(k);
    return s;
}

std::optional<CntWitness> find_cnt_witness(std::span<const std::size_t> keys, std::span<const std::size_t> steps) {
    const std::size_t n = steps.size();
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = j; i-- > 0;) {
            if (keys[i] != keys[j] || steps[i] != steps[j]) continue;
            CntWitness w{i, j, {}};
            bool ok = true;
            for (std::size_t p = i + 1; p < j && ok; ++p) {
                std::size_t q = 0;
                while (q < i && keys[q] != keys[p]) ++q;
                if (q == i) ok = false;
                else w.h.push_back(q);
            }
            if (ok) return w;
        }
    }
    return std::nullopt;
}

CntSeq cnt(const CntSeq& s, const CntWitness& w) {
    const std::size_t n = s.steps.size();
    if (!(w.i < w.j && w.j < n) || w.h.size() != w.j - w.i - 1) throw std::invalid_argument("witness positions out of range");
    if (s.keys[w.i] != s.keys[w.j] || s.steps[w.i] != s.steps[w.j]) throw std::invalid_argument("witness endpoints differ");
    for (std::size_t p = w.i + 1; p < w.j; ++p) {
        const auto q = w.h[p - w.i - 1];
        if (q >= w.i || s.keys[q] != s.keys[p]) throw std::invalid_argument("witness map does not match");
    }
    CntSeq out;
    for (std::size_t k = 0; k <= w.i; ++k) {
        out.keys.push_back(s.keys[k]);
        out.origin.push_back(s.origin[k]);
    }
    for (std::size_t k = 0; k < w.i; ++k) {
        out.steps.push_back(s.steps[k]);
        out.delays.push_back(s.delays[k]);
    }
    for (std::size_t p = w.i + 1; p < w.j; ++p) {
        const auto q = w.h[p - w.i - 1];
        out.delays[q] = out.delays[q] + s.delays[p];
    }
    out.steps.push_back(s.steps[w.j]);
    out.delays.push_back(s.delays[w.i] + s.delays[w.j]);
    for (std::size_t k = w.j + 1; k <= n; ++k) {
        out.keys.push_back(s.keys[k]);
        out.origin.push_back(s.origin[k]);
        if (k < n) {
            out.steps.push_back(s.steps[k]);
            out.delays.push_back(s.delays[k]);
        }
    }
    return out;
}

CntSeq cnt_star(CntSeq s) {
    while (const auto w = find_cnt_witness(s.keys, s.steps)) s = cnt(s, *w);
    return s;
}

Rational ContractedRun::duration() const {
    Rational d;
    for (const auto& t : delays) d = d + t;
    return d;
}

namespace {

// Step identity for matching: the edge id, or a marker for calls and returns.
std::size_t step_id(const Step& s) {
    if (s.kind == StepKind::edge) return *s.edge;
    return s.kind == StepKind::call ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(-2);
}

}  // namespace

ContractedRun cnt_star_fragment(const AnnotatedRun& ar, const Fragment& f) {
    std::map<AnnotatedConfig, std::size_t> ids;
    std::vector<std::size_t> keys;
    std::vector<std::size_t> steps;
    std::vector<Rational> delays;
    for (std::size_t k = f.begin; k <= f.end; ++k) {
        keys.push_back(ids.emplace(ar.ann[k], ids.size()).first->second);
        if (k < f.end) {
            steps.push_back(step_id(ar.run.steps[k]));
            delays.push_back(ar.run.steps[k].delay);
        }
    }
    CntSeq s = make_seq(std::move(keys), std::move(steps), std::move(delays));
    for (auto& o : s.origin) o += f.begin;
    s = cnt_star(std::move(s));

    ContractedRun c;
    c.skel.init = ar.ann[s.origin[0]].cl;
    for (std::size_t p = 0; p < s.steps.size(); ++p) {
        // the step leaving position p is the original step leaving the last deleted occurrence,
        // which lands on origin[p+1]
        const auto& orig = ar.run.steps[s.origin[p + 1] - 1];
        c.skel.steps.push_back({orig.kind, orig.edge, ar.ann[s.origin[p + 1]].cl});
    }
    c.delays = s.delays;
    c.origin = s.origin;
    return c;
}

ContractedRun cnt_star_run(const AnnotatedRun& ar) { return cnt_star_fragment(ar, {0, ar.run.steps.size()}); }

PipelineResult contract_run(const Model& m, const Run& run, const Rational& T) {
    PipelineResult out;
    const AnnotatedRun ar = annotate_bg13(m, run, m.cmax());
    out.split = split_pipeline(ar, T, m.rmax());
    out.run.skel.init = ar.ann[0].cl;
    out.run.origin.push_back(0);
    for (const auto& f : out.split.type3) {
        ContractedRun piece = cnt_star_fragment(ar, f);
        for (std::size_t p = 0; p < piece.skel.steps.size(); ++p) {
            out.run.skel.steps.push_back(piece.skel.steps[p]);
            out.run.delays.push_back(piece.delays[p]);
            out.run.origin.push_back(piece.origin[p + 1]);
        }
        out.pieces.push_back(std::move(piece));
    }
    return out;
}

std::optional<Run> certify(const Model& m, const Run& original, const ContractedRun& c) {
    LpOptions opt;
    opt.exact_duration = original.duration();
    opt.end = original.last().val;
    const auto w = lp_feasible(m, c.skel, original.init.val, opt);
    if (!w) return std::nullopt;
    return witness_run(m, c.skel, original.init.val, *w);
}

mpz_class alpha(std::int64_t n_boxes, std::int64_t k) {
    mpz_class sum = 0;
    mpz_class term = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        term *= n_boxes;
        sum += term;
    }
    return sum;
}

namespace {

mpz_class pow_z(std::int64_t b, std::int64_t e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(b), static_cast<unsigned long>(e));
    return r;
}

}  // namespace

mpz_class bound_C(const Rational& T, std::int64_t rmax, std::int64_t nvars, std::int64_t n_boxes, std::int64_t k,
                  std::int64_t nlocs, std::int64_t cmax) {
    const Rational tr = T * Rational(static_cast<long>(rmax));
    mpz_class windows = tr.floor();
    if (!tr.is_integer()) windows += 1;  // ceil
    windows += 1;
    const mpz_class a = alpha(n_boxes, k) * nlocs;
    return 24 * windows * nvars * nvars * a * a * pow_z(2 * cmax + 1, 2 * nvars);
}

mpz_class bound_type3(std::int64_t nvars, std::int64_t n_boxes, std::int64_t k, std::int64_t nlocs, std::int64_t cmax) {
    const mpz_class base = alpha(n_boxes, k) * nlocs * pow_z(2 * cmax + 1, nvars);
    return base * base + 1;
}

std::int64_t location_count(const Model& m) {
    std::int64_t n = static_cast<std::int64_t>(m.nodes.size());
    for (const auto& b : m.boxes) {
        const auto& c = m.components[b.callee];
        n += static_cast<std::int64_t>(c.entries.size() + c.exits.size());
    }
    return n;
}

}  // namespace rha
