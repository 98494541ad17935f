#include "apal/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "apal/bench.hpp"
#include "apal/errors.hpp"
#include "apal/schedules.hpp"

namespace apal {

using nlohmann::json;

ConfigParseError::ConfigParseError(const std::string& what, int line)
    : ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
{
}

int ExperimentConfig::resolved_grid_size() const
{
    return grid_size > 0 ? grid_size : default_grid_size(engine.space.dim());
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    // Line of the first occurrence of "key" in the source text.
    int line_of(const std::string& key) const
    {
        const auto pos = text_.find('"' + key + '"');
        if (pos == std::string::npos)
            return 0;
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const { throw ConfigParseError(msg, line_of(key)); }

    void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) const
    {
        if (!obj.is_object())
            fail(where, where + ": expected an object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : obj.items()) {
            if (!ok.count(k))
                fail(k, where + ": unknown key \"" + k + "\"");
        }
    }

    double number(const json& obj, const std::string& key, std::optional<double> fallback = std::nullopt) const
    {
        if (!obj.contains(key)) {
            if (fallback)
                return *fallback;
            fail(key, "missing required key \"" + key + "\"");
        }
        const auto& v = obj.at(key);
        if (!v.is_number())
            fail(key, "\"" + key + "\" must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            fail(key, "\"" + key + "\" must be finite");
        return d;
    }

    long long integer(const json& obj, const std::string& key, long long fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        const auto& v = obj.at(key);
        if (!v.is_number_integer())
            fail(key, "\"" + key + "\" must be an integer");
        return v.get<long long>();
    }

    std::optional<int> optional_int(const json& obj, const std::string& key) const
    {
        if (!obj.contains(key) || obj.at(key).is_null())
            return std::nullopt;
        return static_cast<int>(integer(obj, key, 0));
    }

    std::string string(const json& obj, const std::string& key, const std::string& fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        if (!obj.at(key).is_string())
            fail(key, "\"" + key + "\" must be a string");
        return obj.at(key).get<std::string>();
    }

    Eigen::VectorXd vector(const json& obj, const std::string& key) const
    {
        const auto& v = obj.at(key);
        if (!v.is_array() || v.empty())
            fail(key, "\"" + key + "\" must be a non-empty array of numbers");
        Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                fail(key, "\"" + key + "\" must contain only numbers");
            out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        }
        return out;
    }

private:
    const std::string& text_;
};

DesignSpace parse_space(const Parser& p, const json& j)
{
    p.only_keys(j, "space", {"dimension", "lower", "upper", "metric", "metric_dimension"});
    const long long dim = p.integer(j, "dimension", 1);
    if (dim < 1)
        p.fail("dimension", "space.dimension must be >= 1");
    DesignSpace s = DesignSpace::unit_cube(static_cast<int>(dim));
    if (j.contains("lower"))
        s.lower = p.vector(j, "lower");
    if (j.contains("upper"))
        s.upper = p.vector(j, "upper");
    if (s.lower.size() != dim || s.upper.size() != dim)
        p.fail("lower", "space.lower and space.upper need one entry per dimension");
    for (Eigen::Index d = 0; d < dim; ++d) {
        if (!(s.lower[d] < s.upper[d]))
            p.fail("lower", "space: lower bound must be below upper bound in dimension " + std::to_string(d));
    }
    const std::string metric = p.string(j, "metric", "linf");
    if (metric == "linf")
        s.metric = Metric::LInf;
    else if (metric == "l2")
        s.metric = Metric::L2;
    else
        p.fail("metric", "space.metric must be \"linf\" or \"l2\"");
    if (j.contains("metric_dimension") && !j.at("metric_dimension").is_null()) {
        const double d1 = p.number(j, "metric_dimension");
        if (d1 < 0.0)
            p.fail("metric_dimension", "space.metric_dimension must be >= 0");
        s.metric_dimension = d1;
    }
    return s;
}

MultiOutputKernel parse_kernel(const Parser& p, const json& j)
{
    p.only_keys(j, "kernel", {"structure", "latents", "mixing"});
    if (!j.contains("latents") || !j.at("latents").is_array() || j.at("latents").empty())
        p.fail("latents", "kernel.latents must be a non-empty array");
    std::vector<ScalarKernel> latents;
    for (const auto& l : j.at("latents")) {
        p.only_keys(l, "latents", {"family", "variance", "lengthscale"});
        ScalarKernel k;
        try {
            k.family = kernel_family_from_string(p.string(l, "family", "squared_exponential"));
        }
        catch (const ConfigError& e) {
            p.fail("family", e.what());
        }
        k.variance = p.number(l, "variance");
        k.lengthscale = p.number(l, "lengthscale");
        if (!(k.variance > 0.0))
            p.fail("variance", "kernel variance must be positive");
        if (!(k.lengthscale > 0.0))
            p.fail("lengthscale", "kernel lengthscale must be positive");
        latents.push_back(k);
    }
    const std::string structure = p.string(j, "structure", "independent");
    if (structure == "independent") {
        if (j.contains("mixing"))
            p.fail("mixing", "kernel.mixing is only valid with structure \"linear_mixing\"");
        return MultiOutputKernel::independent(std::move(latents));
    }
    if (structure != "linear_mixing")
        p.fail("structure", "kernel.structure must be \"independent\" or \"linear_mixing\"");
    if (!j.contains("mixing") || !j.at("mixing").is_array())
        p.fail("structure", "linear_mixing needs a \"mixing\" matrix");
    const auto& rows = j.at("mixing");
    const auto m = static_cast<Eigen::Index>(latents.size());
    if (static_cast<Eigen::Index>(rows.size()) != m)
        p.fail("mixing", "kernel.mixing must be m x m");
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
            p.fail("mixing", "kernel.mixing must be m x m");
        for (Eigen::Index c = 0; c < m; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number())
                p.fail("mixing", "kernel.mixing must contain only numbers");
            a(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    try {
        return MultiOutputKernel::linear_mixing(std::move(latents), std::move(a));
    }
    catch (const ConfigError& e) {
        p.fail("mixing", e.what());
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    }
    catch (const json::parse_error& e) {
        const auto upto = std::min(text.size(), static_cast<std::size_t>(e.byte > 0 ? e.byte - 1 : 0));
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ConfigParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    const Parser p(text);
    p.only_keys(j, "config", {"schema_version", "name", "space", "kernel", "eps", "delta", "noise_variance", "partition", "schedules", "seeds",
                              "budget", "grid_size", "output_dir", "modeling_workers"});

    if (j.contains("schema_version") && p.integer(j, "schema_version", kSchemaVersion) != kSchemaVersion)
        p.fail("schema_version", "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");

    ExperimentConfig c;
    c.name = p.string(j, "name", c.name);
    auto& e = c.engine;
    e.space = j.contains("space") ? parse_space(p, j.at("space")) : DesignSpace::unit_cube(1);
    if (!j.contains("kernel"))
        p.fail("kernel", "missing required key \"kernel\"");
    e.kernel = parse_kernel(p, j.at("kernel"));
    const int m = e.kernel.outputs();

    if (!j.contains("eps"))
        p.fail("eps", "missing required key \"eps\"");
    if (j.at("eps").is_number())
        e.eps = ObjVec::Constant(m, p.number(j, "eps"));
    else
        e.eps = p.vector(j, "eps");
    if (e.eps.size() != m)
        p.fail("eps", "eps needs one entry per objective");
    if (!(e.eps.minCoeff() > 0.0))
        p.fail("eps", "every eps entry must be positive");

    e.delta = p.number(j, "delta", 0.05);
    if (!(e.delta > 0.0 && e.delta < 1.0))
        p.fail("delta", "delta must lie in (0,1)");
    e.noise_variance = p.number(j, "noise_variance", e.noise_variance);
    if (!(e.noise_variance > 0.0))
        p.fail("noise_variance", "noise_variance must be positive");

    e.partition = PartitionParams::defaults_for(e.space.dim(), e.space.metric);
    if (j.contains("partition")) {
        const auto& pj = j.at("partition");
        p.only_keys(pj, "partition", {"children", "rho", "v1", "v2"});
        e.partition.children = static_cast<int>(p.integer(pj, "children", e.partition.children));
        e.partition.rho = p.number(pj, "rho", e.partition.rho);
        e.partition.v1 = p.number(pj, "v1", e.partition.v1);
        e.partition.v2 = p.number(pj, "v2", e.partition.v2);
        try {
            e.partition.validate();
        }
        catch (const ConfigError& err) {
            p.fail("partition", err.what());
        }
    }

    if (j.contains("schedules")) {
        const auto& sj = j.at("schedules");
        p.only_keys(sj, "schedules", {"h_max_override", "beta_h_max", "c1", "q"});
        e.h_max_override = p.optional_int(sj, "h_max_override");
        if (e.h_max_override && *e.h_max_override < 0)
            p.fail("h_max_override", "h_max_override must be >= 0");
        e.beta_h_max = p.optional_int(sj, "beta_h_max");
        if (e.beta_h_max && *e.beta_h_max < 0)
            p.fail("beta_h_max", "beta_h_max must be >= 0");
        e.c1 = p.number(sj, "c1", e.c1);
        e.q = p.number(sj, "q", e.q);
        if (!(e.c1 > 0.0))
            p.fail("c1", "c1 must be positive");
        if (!(e.q > 0.0))
            p.fail("q", "q must be positive");
    }

    const long long budget = p.integer(j, "budget", e.budget);
    if (budget < 0 || budget > 10'000'000)
        p.fail("budget", "budget must lie in [0, 1e7]");
    e.budget = static_cast<int>(budget);
    const long long workers = p.integer(j, "modeling_workers", e.workers);
    if (workers < 1 || workers > 256)
        p.fail("modeling_workers", "modeling_workers must lie in [1, 256]");
    e.workers = static_cast<int>(workers);

    if (j.contains("seeds")) {
        const auto& sj = j.at("seeds");
        if (!sj.is_array() || sj.empty())
            p.fail("seeds", "seeds must be a non-empty array of non-negative integers");
        c.seeds.clear();
        for (const auto& s : sj) {
            if (!s.is_number_unsigned())
                p.fail("seeds", "seeds must be a non-empty array of non-negative integers");
            c.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    const long long grid = p.integer(j, "grid_size", 0);
    if (grid != 0 && grid < 2)
        p.fail("grid_size", "grid_size must be >= 2 (or 0 for the default)");
    c.grid_size = static_cast<int>(grid);
    c.output_dir = p.string(j, "output_dir", c.output_dir);

    try {
        e.validate();
        Schedules check(e.schedule_params());
    }
    catch (const ConfigError& err) {
        throw ConfigParseError(err.what(), 0);
    }
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigParseError("cannot read config file " + path, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::ordered_json to_json(const ExperimentConfig& c)
{
    using oj = nlohmann::ordered_json;
    const auto& e = c.engine;
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    auto opt = [](const std::optional<int>& v) { return v ? oj(*v) : oj(nullptr); };

    oj space{{"dimension", e.space.dim()},
             {"lower", vec(e.space.lower)},
             {"upper", vec(e.space.upper)},
             {"metric", e.space.metric == Metric::LInf ? "linf" : "l2"},
             {"metric_dimension", e.space.effective_metric_dimension()}};
    oj latents = oj::array();
    for (const auto& k : e.kernel.latents())
        latents.push_back({{"family", std::string(to_string(k.family))}, {"variance", k.variance}, {"lengthscale", k.lengthscale}});
    oj kernel{{"structure", e.kernel.is_independent() ? "independent" : "linear_mixing"}, {"latents", latents}};
    if (e.kernel.mixing()) {
        oj rows = oj::array();
        const auto& a = *e.kernel.mixing();
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            rows.push_back(vec(a.row(r).transpose()));
        kernel["mixing"] = rows;
    }
    return oj{{"schema_version", kSchemaVersion},
              {"name", c.name},
              {"space", space},
              {"kernel", kernel},
              {"eps", vec(e.eps)},
              {"delta", e.delta},
              {"noise_variance", e.noise_variance},
              {"partition", {{"children", e.partition.children}, {"rho", e.partition.rho}, {"v1", e.partition.v1}, {"v2", e.partition.v2}}},
              {"schedules", {{"h_max_override", opt(e.h_max_override)}, {"beta_h_max", opt(e.beta_h_max)}, {"c1", e.c1}, {"q", e.q}}},
              {"seeds", c.seeds},
              {"budget", e.budget},
              {"grid_size", c.resolved_grid_size()}};
}

} // namespace apal
