#include "covlaw/config.hpp"

#include "covlaw/errors.hpp"

#include <toml.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace covlaw {

std::string to_string(Statistic s) {
    switch (s) {
        case Statistic::Trace: return "trace";
        case Statistic::OpNorm: return "opnorm";
        case Statistic::EtaEstimator: return "eta-estimator";
        case Statistic::Tail: return "tail";
    }
    return "?";
}

std::string to_string(Reference r) {
    switch (r) {
        case Reference::SemicircularAtN: return "semicircular-at-n";
        case Reference::SemicircularAtNref: return "semicircular-at-nref";
        case Reference::ExactGaussian: return "exact-gaussian";
    }
    return "?";
}

namespace {

// A TOML table with a dotted path for diagnostics; unread keys are reported as unknown.
class Section {
public:
    Section(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        std::string where;
        if (const toml::node* n = t_.get(key)) where = "line " + std::to_string(n->source().begin.line) + ", ";
        throw ConfigError(where + "field '" + field(key) + "': " + what);
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return t_.contains(key);
    }

    const toml::node* node(const std::string& key) {
        seen_.insert(key);
        return t_.get(key);
    }

    std::string str(const std::string& key, const std::string& dflt) {
        const toml::node* n = node(key);
        if (!n) return dflt;
        if (auto v = n->value<std::string>()) return *v;
        fail(key, "expected a string");
    }

    double real(const std::string& key, double dflt) {
        const toml::node* n = node(key);
        if (!n) return dflt;
        if (n->is_integer() || n->is_floating_point()) return *n->value<double>();
        fail(key, "expected a number");
    }

    std::int64_t integer(const std::string& key, std::int64_t dflt) {
        const toml::node* n = node(key);
        if (!n) return dflt;
        if (auto v = n->value<std::int64_t>(); v && n->is_integer()) return *v;
        fail(key, "expected an integer");
    }

    bool boolean(const std::string& key, bool dflt) {
        const toml::node* n = node(key);
        if (!n) return dflt;
        if (auto v = n->value<bool>()) return *v;
        fail(key, "expected true or false");
    }

    std::vector<std::int64_t> int_list(const std::string& key, std::vector<std::int64_t> dflt) {
        const toml::node* n = node(key);
        if (!n) return dflt;
        const toml::array* a = n->as_array();
        if (!a) fail(key, "expected an array of integers");
        std::vector<std::int64_t> out;
        for (const auto& e : *a) {
            if (!e.is_integer()) fail(key, "expected an array of integers");
            out.push_back(*e.value<std::int64_t>());
        }
        return out;
    }

    std::vector<double> real_list(const std::string& key, std::vector<double> dflt) {
        const toml::node* n = node(key);
        if (!n) return dflt;
        const toml::array* a = n->as_array();
        if (!a) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : *a) {
            if (!e.is_integer() && !e.is_floating_point()) fail(key, "expected an array of numbers");
            out.push_back(*e.value<double>());
        }
        return out;
    }

    std::vector<std::string> str_list(const std::string& key, std::vector<std::string> dflt) {
        const toml::node* n = node(key);
        if (!n) return dflt;
        const toml::array* a = n->as_array();
        if (!a) fail(key, "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& e : *a) {
            auto v = e.value<std::string>();
            if (!v) fail(key, "expected an array of strings");
            out.push_back(*v);
        }
        return out;
    }

    /// [[x0, y0], [x1, y1], ...]
    std::vector<std::pair<double, double>> pairs(const std::string& key) {
        const toml::node* n = node(key);
        if (!n) fail(key, "missing");
        const toml::array* a = n->as_array();
        if (!a) fail(key, "expected an array of [a, b] pairs");
        std::vector<std::pair<double, double>> out;
        for (const auto& e : *a) {
            const toml::array* p = e.as_array();
            if (!p || p->size() != 2 || !(*p)[0].value<double>() || !(*p)[1].value<double>())
                fail(key, "expected an array of [a, b] pairs");
            out.emplace_back(*(*p)[0].value<double>(), *(*p)[1].value<double>());
        }
        return out;
    }

    models::PiecewiseLinear piecewise(const std::string& key) {
        const auto pts = pairs(key);
        std::vector<double> xs, ys;
        for (auto [x, y] : pts) {
            xs.push_back(x);
            ys.push_back(y);
        }
        try {
            return models::PiecewiseLinear(std::move(xs), std::move(ys));
        } catch (const DomainError& e) {
            fail(key, e.what());
        }
    }

    std::optional<Section> table(const std::string& key) {
        const toml::node* n = node(key);
        if (!n) return std::nullopt;
        const toml::table* t = n->as_table();
        if (!t) fail(key, "expected a table");
        return Section(*t, field(key));
    }

    std::vector<Section> table_array(const std::string& key) {
        const toml::node* n = node(key);
        std::vector<Section> out;
        if (!n) return out;
        const toml::array* a = n->as_array();
        if (!a) fail(key, "expected an array of tables");
        for (std::size_t k = 0; k < a->size(); ++k) {
            const toml::table* t = (*a)[k].as_table();
            if (!t) fail(key, "expected an array of tables");
            out.emplace_back(*t, field(key) + "[" + std::to_string(k) + "]");
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto& [k, v] : t_) {
            const std::string key(k.str());
            if (!seen_.count(key))
                throw ConfigError("line " + std::to_string(v.source().begin.line) + ", field '" + field(key) +
                                  "': unknown field");
        }
    }

private:
    const toml::table& t_;
    std::string path_;
    std::set<std::string> seen_;
};

Statistic statistic_from(Section& s, const std::string& key, const std::string& v) {
    if (v == "trace") return Statistic::Trace;
    if (v == "opnorm") return Statistic::OpNorm;
    if (v == "eta-estimator") return Statistic::EtaEstimator;
    if (v == "tail") return Statistic::Tail;
    s.fail(key, "unknown statistic '" + v + "' (trace | opnorm | eta-estimator | tail)");
}

Reference reference_from(Section& s, const std::string& key, const std::string& v) {
    if (v == "semicircular-at-n") return Reference::SemicircularAtN;
    if (v == "semicircular-at-nref") return Reference::SemicircularAtNref;
    if (v == "exact-gaussian") return Reference::ExactGaussian;
    s.fail(key, "unknown reference '" + v + "' (semicircular-at-n | semicircular-at-nref | exact-gaussian)");
}

models::IntervalUnion intervals(Section& s, const std::string& key) {
    models::IntervalUnion u;
    for (auto [a, b] : s.pairs(key)) u.emplace_back(a, b);
    return u;
}

models::KernelTerm kernel_term(Section& k, const std::string& base_dir, const std::string& i,
                               const std::string& j) {
    const std::string type = k.str("type", "constant");
    if (type == "constant") return models::ConstantKernel{k.real("value", 1.0)};
    if (type == "band") {
        models::BandKernel b{k.piecewise("profile"), k.real("epsilon", 1.0)};
        if (!(b.epsilon > 0)) k.fail("epsilon", "must be positive");
        return b;
    }
    if (type == "separable") {
        models::SeparableKernel sk;
        sk.coefficient = k.real("coefficient", 1.0);
        sk.u = k.piecewise("u");
        sk.v = k.piecewise("v");
        sk.power = static_cast<int>(k.integer("power", 1));
        if (sk.power != 1 && sk.power != 2) k.fail("power", "must be 1 or 2");
        return sk;
    }
    if (type == "grid") {
        const std::string file = k.str("file", "");
        if (file.empty()) k.fail("file", "grid kernels need a CSV file");
        const std::filesystem::path p = std::filesystem::path(base_dir) / file;
        for (auto& [key, grid] : read_grid_csv(p.string()))
            if (key.first == i && key.second == j) return grid;
        k.fail("file", "no rows for pair (" + i + "," + j + ") in " + p.string());
    }
    k.fail("type", "unknown kernel type '" + type + "' (constant | band | separable | grid)");
}

ModelConfig parse_model(Section& m, const std::string& base_dir, int max_n) {
    ModelConfig mc;
    mc.kind = m.str("kind", "gue");
    std::vector<std::string> indices = m.str_list("indices", {"1"});
    if (indices.empty()) m.fail("indices", "at least one index is required");
    if (mc.kind == "gue") {
        mc.kernel = models::gue_kernel(indices);
    } else if (mc.kind == "band") {
        if (indices.size() != 1) m.fail("indices", "band models have a single index");
        try {
            mc.kernel = models::band_kernel(m.piecewise("profile"), m.real("epsilon", 1.0), indices.front());
        } catch (const DomainError& e) {
            m.fail("profile", e.what());
        }
    } else if (mc.kind == "weighted") {
        mc.kernel.indices = indices;
        auto entries = m.table_array("kernel");
        if (entries.empty()) m.fail("kernel", "weighted models need [[model.kernel]] entries");
        for (Section& k : entries) {
            const std::string i = k.str("i", ""), j = k.str("j", "");
            if (std::find(indices.begin(), indices.end(), i) == indices.end()) k.fail("i", "unknown index '" + i + "'");
            if (std::find(indices.begin(), indices.end(), j) == indices.end()) k.fail("j", "unknown index '" + j + "'");
            models::KernelTerm term = kernel_term(k, base_dir, i, j);
            const bool mirror = k.boolean("mirror", i != j);
            k.reject_unknown();
            mc.kernel.h[{i, j}].terms.push_back(term);
            if (mirror && i != j) {
                // h_{j,i}(s,t) = h_{i,j}(t,s)
                models::KernelTerm t2 = term;
                if (auto* sk = std::get_if<models::SeparableKernel>(&t2)) std::swap(sk->u, sk->v);
                if (auto* g = std::get_if<models::GridKernel>(&t2)) {
                    std::swap(g->s_nodes, g->t_nodes);
                    g->values.transposeInPlace();
                }
                mc.kernel.h[{j, i}].terms.push_back(t2);
            }
        }
    } else if (mc.kind == "fgf") {
        mc.fgf_ramp = m.real("ramp", 1.0 / (4.0 * max_n));
        for (Section& e : m.table_array("j1")) {
            models::FgfSpec::Entry en{e.str("index", ""), intervals(e, "supp_f"), {}};
            en.supp_g = e.has("supp_g") ? intervals(e, "supp_g") : en.supp_f;
            e.reject_unknown();
            mc.fgf.j1.push_back(std::move(en));
        }
        for (Section& e : m.table_array("j2")) {
            models::FgfSpec::Entry en{e.str("index", ""), intervals(e, "supp_f"), intervals(e, "supp_g")};
            e.reject_unknown();
            mc.fgf.j2.push_back(std::move(en));
        }
        m.has("indices");
        try {
            models::FgfModel fm = models::fgf_kernels(mc.fgf, mc.fgf_ramp);
            mc.kernel = std::move(fm.kernel);
            mc.fgf_t = fm.t;
        } catch (const DomainError& e) {
            m.fail("j2", e.what());
        }
    } else {
        m.fail("kind", "unknown model kind '" + mc.kind + "' (gue | weighted | band | fgf)");
    }
    m.reject_unknown();
    mc.kernel.validate();
    return mc;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "line " << e.source().begin.line << ", column " << e.source().begin.column << ": "
           << e.description();
        throw ConfigError(os.str());
    }
    Section top(root, "");
    RunConfig cfg;
    cfg.experiment = top.str("experiment", cfg.experiment);
    if (top.has("statistic")) cfg.statistic = statistic_from(top, "statistic", top.str("statistic", ""));
    if (top.has("reference")) cfg.reference = reference_from(top, "reference", top.str("reference", ""));
    cfg.polynomial_text = top.str("polynomial", cfg.polynomial_text);

    std::vector<std::int64_t> sched(cfg.schedule.begin(), cfg.schedule.end());
    sched = top.int_list("schedule", sched);
    if (sched.empty()) top.fail("schedule", "must not be empty");
    cfg.schedule.clear();
    for (std::size_t k = 0; k < sched.size(); ++k) {
        if (sched[k] < 1) top.fail("schedule", "entries must be positive");
        if (k && sched[k] <= sched[k - 1]) top.fail("schedule", "must be strictly increasing");
        cfg.schedule.push_back(static_cast<int>(sched[k]));
    }
    cfg.samples = static_cast<int>(top.integer("samples", cfg.samples));
    if (cfg.samples < 1) top.fail("samples", "must be at least 1");
    const std::int64_t seed = top.integer("seed", 0);
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.n_ref = static_cast<int>(top.integer("n_ref", cfg.n_ref));
    if (cfg.n_ref < 1) top.fail("n_ref", "must be positive");
    {
        std::vector<std::int64_t> p(cfg.bound_orders.begin(), cfg.bound_orders.end());
        p = top.int_list("bound_orders", p);
        cfg.bound_orders.assign(p.begin(), p.end());
        for (int q : cfg.bound_orders)
            if (q < 1) top.fail("bound_orders", "entries must be positive");
    }

    const int max_n = cfg.schedule.back();
    if (auto m = top.table("model")) cfg.model = parse_model(*m, base_dir, max_n);
    else cfg.model.kernel = models::gue_kernel();

    if (auto b = top.table("base")) {
        // Every key is a base function given as [[x, y], ...].
        for (const auto& [k, v] : root["base"].ref<toml::table>()) {
            const std::string name(k.str());
            cfg.base.functions[name] = b->piecewise(name);
        }
        b->reject_unknown();
    }

    if (auto s = top.table("strong")) {
        std::vector<std::int64_t> mo(cfg.strong.moment_orders.begin(), cfg.strong.moment_orders.end());
        mo = s->int_list("moment_orders", mo);
        cfg.strong.moment_orders.assign(mo.begin(), mo.end());
        for (int q : cfg.strong.moment_orders)
            if (q < 1) s->fail("moment_orders", "entries must be positive");
        cfg.strong.term_budget = static_cast<std::size_t>(s->integer("term_budget", static_cast<std::int64_t>(cfg.strong.term_budget)));
        cfg.strong.spectrum_dump = s->boolean("spectrum_dump", false);
        s->reject_unknown();
    }
    if (auto e = top.table("estimator")) {
        cfg.estimator.i = e->str("i", cfg.estimator.i);
        cfg.estimator.j = e->str("j", cfg.estimator.j);
        cfg.estimator.target = e->str("target", cfg.estimator.target);
        std::vector<std::int64_t> mm(cfg.estimator.m.begin(), cfg.estimator.m.end());
        mm = e->int_list("m", mm);
        cfg.estimator.m.assign(mm.begin(), mm.end());
        for (std::size_t k = 0; k < cfg.estimator.m.size(); ++k) {
            if (cfg.estimator.m[k] < 1) e->fail("m", "entries must be positive");
            if (k && cfg.estimator.m[k] <= cfg.estimator.m[k - 1]) e->fail("m", "must be strictly increasing");
        }
        cfg.estimator.repetitions = static_cast<int>(e->integer("repetitions", cfg.estimator.repetitions));
        if (cfg.estimator.repetitions < 2) e->fail("repetitions", "must be at least 2");
        e->reject_unknown();
    }
    if (auto t = top.table("tail")) {
        cfg.tail.delta = t->real_list("delta", cfg.tail.delta);
        for (double d : cfg.tail.delta)
            if (d < 0) t->fail("delta", "entries must be nonnegative");
        const std::string units = t->str("delta_units", "sqrt_t");
        if (units != "sqrt_t" && units != "absolute") t->fail("delta_units", "expected \"sqrt_t\" or \"absolute\"");
        cfg.tail.delta_in_sqrt_t = units == "sqrt_t";
        cfg.tail.lipschitz = t->real("lipschitz", 1.0);
        if (!(cfg.tail.lipschitz > 0)) t->fail("lipschitz", "must be positive");
        t->reject_unknown();
    }
    top.reject_unknown();

    Alphabet alphabet;
    {
        std::vector<std::string> base;
        for (const auto& [name, f] : cfg.base.functions) base.push_back(name);
        alphabet = Alphabet::make(std::move(base), cfg.model.kernel.indices);
    }
    try {
        cfg.polynomial = parse_polynomial(cfg.polynomial_text, alphabet);
    } catch (const DomainError& e) {
        throw ConfigError("field 'polynomial': " + std::string(e.what()));
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::filesystem::path p(path);
    try {
        return parse_config(ss.str(), p.has_parent_path() ? p.parent_path().string() : ".");
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

DiscreteCovariance build_covariance(const ModelConfig& model, int n) {
    if (model.kind == "gue") return models::gue(n, model.kernel.indices);
    return models::discretize(model.kernel, n);
}

std::vector<std::pair<std::pair<std::string, std::string>, models::GridKernel>>
read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty grid file");
    line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
    if (line != "s,t,i,j,value") throw ConfigError(path + ": line 1: header must be 's,t,i,j,value'");
    std::map<std::pair<std::string, std::string>, std::map<std::pair<double, double>, double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw ConfigError(path + ": line " + std::to_string(lineno) + ": expected 5 fields");
        double s, t, v;
        try {
            s = std::stod(cells[0]);
            t = std::stod(cells[1]);
            v = std::stod(cells[4]);
        } catch (const std::exception&) {
            throw ConfigError(path + ": line " + std::to_string(lineno) + ": non-numeric field");
        }
        if (!std::isfinite(s) || !std::isfinite(t) || !std::isfinite(v))
            throw ConfigError(path + ": line " + std::to_string(lineno) + ": values must be finite");
        rows[{cells[2], cells[3]}][{s, t}] = v;
    }
    std::vector<std::pair<std::pair<std::string, std::string>, models::GridKernel>> out;
    for (const auto& [key, pts] : rows) {
        std::set<double> ss, ts;
        for (const auto& [st, v] : pts) {
            ss.insert(st.first);
            ts.insert(st.second);
        }
        models::GridKernel g;
        g.s_nodes.assign(ss.begin(), ss.end());
        g.t_nodes.assign(ts.begin(), ts.end());
        if (g.s_nodes.size() * g.t_nodes.size() != pts.size())
            throw ConfigError(path + ": grid for (" + key.first + "," + key.second + ") is not rectangular");
        g.values.resize(static_cast<Eigen::Index>(g.s_nodes.size()), static_cast<Eigen::Index>(g.t_nodes.size()));
        for (std::size_t a = 0; a < g.s_nodes.size(); ++a)
            for (std::size_t b = 0; b < g.t_nodes.size(); ++b)
                g.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    pts.at({g.s_nodes[a], g.t_nodes[b]});
        out.emplace_back(key, std::move(g));
    }
    return out;
}

}  // namespace covlaw
