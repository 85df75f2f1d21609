#include "vhc/model_file.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace vhc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct Entry {
    std::string key, value;
    int line;
    bool quoted;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ModelError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& text, const std::string& origin, int line) {
    try {
        ExprPtr e = vhc::parse(text, std::span<const std::string>{});
        return evaluate(e, {});
    } catch (const std::exception& ex) {
        fail(origin, line, "bad numeric value '" + text + "': " + ex.what());
    }
}

int parse_int(const std::string& text, const std::string& origin, int line) {
    double v = parse_real(text, origin, line);
    auto i = static_cast<long long>(std::llround(v));
    if (std::fabs(v - static_cast<double>(i)) > 1e-9)
        fail(origin, line, "expected an integer, got '" + text + "'");
    return static_cast<int>(i);
}

}  // namespace

ModelFile parse_model_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string section;
    std::map<std::string, std::vector<Entry>> sections;
    ModelFile mf;

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section != "reduced" && section != "full" && section != "options")
                fail(origin, lineno, "unknown section [" + section + "]");
            sections[section];
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
        if (section.empty()) fail(origin, lineno, "entry outside of a section");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        bool quoted = false;
        if (!value.empty() && value.front() == '"') {
            std::size_t close = value.find('"', 1);
            if (close == std::string::npos) fail(origin, lineno, "unterminated string");
            std::string rest = trim(value.substr(close + 1));
            if (!rest.empty() && rest[0] != '#' && rest[0] != ';')
                fail(origin, lineno, "trailing text after string value");
            value = value.substr(1, close - 1);
            quoted = true;
        } else {
            // strip trailing comment on bare values
            std::size_t hash = value.find_first_of("#;");
            if (hash != std::string::npos) value = trim(value.substr(0, hash));
            if (value.empty()) fail(origin, lineno, "empty value");
        }
        sections[section].push_back({key, value, lineno, quoted});
        mf.echo.emplace_back(section + "." + key, value);
    }

    const bool has_reduced = sections.count("reduced") > 0;
    const bool has_full = sections.count("full") > 0;
    if (has_reduced == has_full)
        throw ModelError(origin + ": exactly one of [reduced] or [full] must be present");

    if (sections.count("options")) {
        for (const Entry& e : sections["options"]) {
            if (e.key == "N") mf.options.N = parse_int(e.value, origin, e.line);
            else if (e.key == "quad_tol") mf.options.quad_tol = parse_real(e.value, origin, e.line);
            else if (e.key == "eps_M") mf.options.eps_M = parse_real(e.value, origin, e.line);
            else if (e.key == "eps_V") mf.options.eps_V = parse_real(e.value, origin, e.line);
            else if (e.key == "rtol") mf.options.rtol = parse_real(e.value, origin, e.line);
            else if (e.key == "atol") mf.options.atol = parse_real(e.value, origin, e.line);
            else if (e.key == "k1") mf.options.k1 = parse_real(e.value, origin, e.line);
            else if (e.key == "k2") mf.options.k2 = parse_real(e.value, origin, e.line);
            else if (e.key == "line_domain") mf.options.line_domain = parse_real(e.value, origin, e.line);
            else fail(origin, e.line, "unknown option '" + e.key + "'");
        }
    }

    auto topo_of = [&](const std::string& v, int line) {
        if (v == "circle") return Topology::Circle;
        if (v == "line") return Topology::Line;
        fail(origin, line, "topology must be 'circle' or 'line'");
    };

    if (has_reduced) {
        std::string psi1, psi2;
        int l1 = 0, l2 = 0;
        Topology topo = Topology::Circle;
        bool topo_set = false;
        double period = 0;
        bool period_set = false;
        for (const Entry& e : sections["reduced"]) {
            if (e.key == "psi1") { psi1 = e.value; l1 = e.line; }
            else if (e.key == "psi2") { psi2 = e.value; l2 = e.line; }
            else if (e.key == "topology") { topo = topo_of(e.value, e.line); topo_set = true; }
            else if (e.key == "period") { period = parse_real(e.value, origin, e.line); period_set = true; }
            else fail(origin, e.line, "unknown key '" + e.key + "' in [reduced]");
        }
        if (psi1.empty() || psi2.empty())
            throw ModelError(origin + ": [reduced] requires psi1 and psi2");
        if (!topo_set) throw ModelError(origin + ": [reduced] requires topology");
        if (topo == Topology::Circle && !period_set)
            throw ModelError(origin + ": period is required for circle topology");
        if (topo == Topology::Line && period_set)
            throw ModelError(origin + ": period is only meaningful for circle topology");
        try {
            ExprPtr p1 = vhc::parse(psi1, {"s"});
            ExprPtr p2 = vhc::parse(psi2, {"s"});
            mf.reduced = make_reduced(ScalarFunction::from_expr(p1, "s"),
                                      ScalarFunction::from_expr(p2, "s"), topo, period);
        } catch (const ParseError& ex) {
            fail(origin, psi1.empty() ? l2 : l1, ex.what());
        }
        mf.is_full = false;
        return mf;
    }

    // [full]
    int n = 0;
    Topology topo = Topology::Circle;
    bool topo_set = false;
    double period = 0;
    bool period_set = false;
    std::map<std::string, Entry> keyed;
    for (const Entry& e : sections["full"]) {
        if (e.key == "n") n = parse_int(e.value, origin, e.line);
        else if (e.key == "topology") { topo = topo_of(e.value, e.line); topo_set = true; }
        else if (e.key == "period") { period = parse_real(e.value, origin, e.line); period_set = true; }
        else keyed[e.key] = e;
    }
    if (n < 2) throw ModelError(origin + ": [full] requires n >= 2");
    if (!topo_set) throw ModelError(origin + ": [full] requires topology");
    if (topo == Topology::Circle && !period_set)
        throw ModelError(origin + ": period is required for circle topology");
    if (topo == Topology::Line && period_set)
        throw ModelError(origin + ": period is only meaningful for circle topology");

    std::vector<std::string> qvars;
    for (int i = 1; i <= n; ++i) qvars.push_back("q" + std::to_string(i));

    auto take = [&](const std::string& key, std::span<const std::string> vars) -> ExprPtr {
        auto it = keyed.find(key);
        if (it == keyed.end()) throw ModelError(origin + ": missing key '" + key + "' in [full]");
        const Entry& e = it->second;
        try {
            ExprPtr r = vhc::parse(e.value, vars);
            keyed.erase(it);
            return r;
        } catch (const ParseError& ex) {
            fail(origin, e.line, std::string("in '" + key + "': ") + ex.what());
        }
    };
    std::vector<std::string> svar{"s"};

    std::vector<std::vector<ExprPtr>> D(n, std::vector<ExprPtr>(n));
    std::vector<std::vector<ExprPtr>> B(n, std::vector<ExprPtr>(n - 1));
    std::vector<ExprPtr> Bperp(n), h(n - 1), sigma(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            D[i][j] = take("D." + std::to_string(i + 1) + "." + std::to_string(j + 1), qvars);
    ExprPtr P = take("P", qvars);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n - 1; ++j)
            B[i][j] = take("B." + std::to_string(i + 1) + "." + std::to_string(j + 1), qvars);
    for (int i = 0; i < n; ++i) Bperp[i] = take("Bperp." + std::to_string(i + 1), qvars);
    for (int i = 0; i < n - 1; ++i) h[i] = take("h." + std::to_string(i + 1), qvars);
    for (int i = 0; i < n; ++i) sigma[i] = take("sigma." + std::to_string(i + 1), svar);

    if (!keyed.empty()) {
        const Entry& e = keyed.begin()->second;
        fail(origin, e.line, "unknown or out-of-range key '" + e.key + "' in [full]");
    }

    mf.is_full = true;
    mf.full = std::make_shared<FullModel>(n, std::move(D), std::move(P), std::move(B),
                                          std::move(Bperp), std::move(h), std::move(sigma), topo,
                                          period);
    mf.full->set_line_span(mf.options.line_domain);
    return mf;
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model_text(ss.str(), path);
}

ReducedDynamics reduced_of(const ModelFile& mf) {
    if (!mf.is_full) return mf.reduced;
    validate_model(*mf.full);
    return reduce(*mf.full);
}

}  // namespace vhc
