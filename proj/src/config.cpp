#include "mather/config.hpp"

#include "mather/errors.hpp"
#include "mather/mather_lp.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mather::cfg {

using nlohmann::json;

namespace {

// A JSON object together with its pointer; keys are ticked off as they are read so
// anything left over is reported as unknown.
class Node {
public:
    Node(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr))
    {
        if (!j_.is_object()) throw InputError("expected an object", ptr_.empty() ? "/" : ptr_);
    }

    std::string at(const std::string& key) const { return ptr_ + "/" + key; }

    const json* get(const std::string& key)
    {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& need(const std::string& key)
    {
        const json* v = get(key);
        if (!v) throw InputError("missing required key '" + key + "'", at(key));
        return *v;
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt)
    {
        const json* v = fallback ? get(key) : &need(key);
        if (!v) return *fallback;
        return as_number(*v, at(key));
    }

    int integer(const std::string& key, std::optional<int> fallback = std::nullopt)
    {
        const json* v = fallback ? get(key) : &need(key);
        if (!v) return *fallback;
        return as_int(*v, at(key));
    }

    bool boolean(const std::string& key, bool fallback)
    {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw InputError("expected true or false", at(key));
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) throw InputError("expected a string", at(key));
        return v->get<std::string>();
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw InputError("unknown key '" + it.key() + "'", at(it.key()));
    }

    static double as_number(const json& v, const std::string& ptr)
    {
        if (!v.is_number()) throw InputError("expected a number", ptr);
        double x = v.get<double>();
        if (!std::isfinite(x)) throw InputError("expected a finite number", ptr);
        return x;
    }

    static int as_int(const json& v, const std::string& ptr)
    {
        if (!v.is_number_integer()) throw InputError("expected an integer", ptr);
        auto x = v.get<long long>();
        if (x < -(1LL << 31) || x > (1LL << 31) - 1) throw InputError("integer out of range", ptr);
        return static_cast<int>(x);
    }

    static Vec vector(const json& v, int size, const std::string& ptr)
    {
        if (!v.is_array() || static_cast<int>(v.size()) != size)
            throw InputError("expected an array of " + std::to_string(size) + " numbers", ptr);
        Vec out(size);
        for (int i = 0; i < size; ++i) out[i] = as_number(v[i], ptr + "/" + std::to_string(i));
        return out;
    }

private:
    const json& j_;
    std::string ptr_;
    std::set<std::string> used_;
};

void positive(double x, const std::string& ptr, const std::string& what)
{
    if (!(x > 0)) throw InputError(what + " must be positive", ptr);
}

}  // namespace

RunConfig parse_config(const json& doc)
{
    RunConfig c;
    Node root(doc, "");

    {
        Node h(root.need("hull"), "/hull");
        c.d = h.integer("d");
        if (c.d < 1) throw InputError("hull dimension d must be at least 1", "/hull/d");
        c.n = h.integer("n");
        if (c.n < 1 || c.n > c.d) throw InputError("driving dimension n must satisfy 1 <= n <= d", "/hull/n");
        const json& A = h.need("A");
        if (!A.is_array() || static_cast<int>(A.size()) != c.d)
            throw InputError("A must list d rows", "/hull/A");
        c.A.resize(c.d, c.n);
        for (int i = 0; i < c.d; ++i)
            c.A.row(i) = Node::vector(A[i], c.n, "/hull/A/" + std::to_string(i)).transpose();
        h.finish();
        hull::TorusHull check(c.A);  // zero columns
    }
    {
        Node l(root.need("lagrangian"), "/lagrangian");
        c.m = l.number("m", 1.0);
        if (!(c.m > 0)) throw InputError("mass must be positive", "/lagrangian/m");
        const json* b = l.get("b");
        c.b = b ? Node::vector(*b, c.n, "/lagrangian/b") : Vec(Vec::Zero(c.n));
        if (const json* p = l.get("potential")) {
            Node pot(*p, "/lagrangian/potential");
            c.c0 = pot.number("c0", 0.0);
            if (const json* modes = pot.get("modes")) {
                if (!modes->is_array()) throw InputError("modes must be an array", "/lagrangian/potential/modes");
                for (std::size_t i = 0; i < modes->size(); ++i) {
                    const std::string ptr = "/lagrangian/potential/modes/" + std::to_string(i);
                    Node md((*modes)[i], ptr);
                    const json& k = md.need("k");
                    if (!k.is_array() || static_cast<int>(k.size()) != c.d)
                        throw InputError("k must list d integers", ptr + "/k");
                    hull::TrigMode mode;
                    mode.k.resize(c.d);
                    for (int a = 0; a < c.d; ++a) mode.k[a] = Node::as_int(k[a], ptr + "/k/" + std::to_string(a));
                    mode.a = md.number("a", 0.0);
                    mode.b = md.number("b", 0.0);
                    md.finish();
                    c.modes.push_back(mode);
                }
            }
            pot.finish();
        }
        l.finish();
        hull::TrigPotential check(c.d, c.c0, c.modes);  // duplicate wave vectors
    }
    c.auto_shift = root.boolean("auto_shift", true);
    c.shift_resolution = root.integer("shift_resolution", 512);
    if (c.shift_resolution < 2) throw InputError("shift_resolution must be at least 2", "/shift_resolution");

    if (const json* s = root.get("solver")) {
        Node sv(*s, "/solver");
        auto& o = c.solver;
        o.N = sv.integer("N", o.N);
        if (o.N < 4) throw InputError("N must be at least 4", "/solver/N");
        o.M = sv.integer("M", o.M);
        if (o.M < 3 || o.M % 2 == 0) throw InputError("M must be odd and at least 3", "/solver/M");
        if (sv.get("v_max")) {
            o.v_max = sv.number("v_max");
            positive(*o.v_max, "/solver/v_max", "v_max");
        }
        o.alpha = sv.number("alpha", o.alpha);
        positive(o.alpha, "/solver/alpha", "alpha");
        if (sv.get("h")) {
            o.h = sv.number("h");
            positive(*o.h, "/solver/h", "h");
        }
        o.tol = sv.number("tol", o.tol);
        positive(o.tol, "/solver/tol", "tol");
        o.max_iter = sv.integer("max_iter", o.max_iter);
        if (o.max_iter < 1) throw InputError("max_iter must be at least 1", "/solver/max_iter");
        o.sweep = sv.string("sweep", o.sweep);
        if (o.sweep != "jacobi" && o.sweep != "gauss-seidel")
            throw InputError("sweep must be 'jacobi' or 'gauss-seidel'", "/solver/sweep");
        sv.finish();
    }
    if (const json* s = root.get("lp")) {
        Node lp(*s, "/lp");
        auto& o = c.lp;
        o.basis_K = lp.integer("basis_K", o.basis_K);
        if (o.basis_K < 1) throw InputError("basis_K must be at least 1 (the basis would be empty)", "/lp/basis_K");
        o.slack = lp.number("slack", o.slack);
        if (!(o.slack >= 0)) throw InputError("slack must be non-negative", "/lp/slack");
        o.nu = lp.string("nu", o.nu);
        lp::TraceSpec::parse(o.nu, c.d);
        o.holonomic = lp.boolean("holonomic", o.holonomic);
        o.max_variables = lp.integer("max_variables", static_cast<int>(o.max_variables));
        if (o.max_variables < 1) throw InputError("max_variables must be positive", "/lp/max_variables");
        lp.finish();
    }
    c.flow.omega0 = Vec::Zero(c.d);
    if (const json* s = root.get("flow")) {
        Node fl(*s, "/flow");
        auto& o = c.flow;
        o.T = fl.number("T", o.T);
        positive(o.T, "/flow/T", "T");
        o.dt = fl.number("dt", o.dt);
        positive(o.dt, "/flow/dt", "dt");
        if (o.dt > o.T) throw InputError("dt exceeds T", "/flow/dt");
        if (const json* w = fl.get("omega0")) o.omega0 = Node::vector(*w, c.d, "/flow/omega0");
        if (const json* sd = fl.get("seeds")) {
            if (sd->is_array()) {
                if (sd->empty()) throw InputError("seed list is empty", "/flow/seeds");
                for (std::size_t i = 0; i < sd->size(); ++i)
                    o.seed_points.push_back(Node::vector((*sd)[i], c.d, "/flow/seeds/" + std::to_string(i)));
                o.seeds = static_cast<int>(o.seed_points.size());
            } else {
                o.seeds = Node::as_int(*sd, "/flow/seeds");
                if (o.seeds < 1) throw InputError("seeds must be at least 1", "/flow/seeds");
            }
        }
        fl.finish();
    }
    if (const json* s = root.get("sweep")) {
        Node sw(*s, "/sweep");
        if (const json* a = sw.get("alphas")) {
            if (!a->is_array()) throw InputError("alphas must be an array", "/sweep/alphas");
            if (a->empty()) throw InputError("sweep list is empty", "/sweep/alphas");
            c.sweep.alphas.clear();
            for (std::size_t i = 0; i < a->size(); ++i) {
                const std::string ptr = "/sweep/alphas/" + std::to_string(i);
                double x = Node::as_number((*a)[i], ptr);
                positive(x, ptr, "alpha");
                c.sweep.alphas.push_back(x);
            }
        }
        sw.finish();
    }
    c.output_dir = root.string("output_dir", c.output_dir);
    if (c.output_dir.empty()) throw InputError("output_dir is empty", "/output_dir");
    root.finish();
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json doc;
    try {
        doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

namespace {
json vec_json(const Vec& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}
}  // namespace

json to_json(const RunConfig& c)
{
    json A = json::array();
    for (int i = 0; i < c.d; ++i) A.push_back(vec_json(c.A.row(i).transpose()));
    json modes = json::array();
    for (const auto& md : c.modes) {
        json k = json::array();
        for (Eigen::Index a = 0; a < md.k.size(); ++a) k.push_back(md.k[a]);
        modes.push_back({{"k", k}, {"a", md.a}, {"b", md.b}});
    }
    json solver = {{"N", c.solver.N},       {"M", c.solver.M},     {"alpha", c.solver.alpha},
                   {"tol", c.solver.tol},   {"max_iter", c.solver.max_iter}, {"sweep", c.solver.sweep}};
    if (c.solver.v_max) solver["v_max"] = *c.solver.v_max;
    if (c.solver.h) solver["h"] = *c.solver.h;
    json flow = {{"T", c.flow.T}, {"dt", c.flow.dt}, {"omega0", vec_json(c.flow.omega0)}};
    if (c.flow.seed_points.empty()) {
        flow["seeds"] = c.flow.seeds;
    } else {
        json s = json::array();
        for (const auto& p : c.flow.seed_points) s.push_back(vec_json(p));
        flow["seeds"] = s;
    }
    return {
        {"hull", {{"d", c.d}, {"n", c.n}, {"A", A}}},
        {"lagrangian", {{"m", c.m}, {"b", vec_json(c.b)}, {"potential", {{"c0", c.c0}, {"modes", modes}}}}},
        {"auto_shift", c.auto_shift},
        {"shift_resolution", c.shift_resolution},
        {"solver", solver},
        {"lp",
         {{"basis_K", c.lp.basis_K},
          {"slack", c.lp.slack},
          {"nu", c.lp.nu},
          {"holonomic", c.lp.holonomic},
          {"max_variables", c.lp.max_variables}}},
        {"flow", flow},
        {"sweep", {{"alphas", c.sweep.alphas}}},
        {"output_dir", c.output_dir},
    };
}

hull::QuasiPeriodicLagrangian make_lagrangian(const RunConfig& c)
{
    hull::QuasiPeriodicLagrangian lag(hull::TorusHull(c.A), c.m, c.b, hull::TrigPotential(c.d, c.c0, c.modes));
    return c.auto_shift ? hull::auto_shift(lag, c.shift_resolution) : lag;
}

std::vector<hull::HullPoint> seed_points(const RunConfig& c)
{
    std::vector<hull::HullPoint> out;
    if (!c.flow.seed_points.empty()) {
        for (const auto& p : c.flow.seed_points) out.emplace_back(p);
        return out;
    }
    for (int s = 0; s < c.flow.seeds; ++s) {
        const double t = (2.0 * s + 1) / (2.0 * c.flow.seeds);
        out.emplace_back(Vec(c.flow.omega0 + Vec::Constant(c.d, t)));
    }
    return out;
}

}  // namespace mather::cfg
