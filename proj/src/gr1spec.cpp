#include "swarm/gr1spec.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace swarm {

namespace {

const std::vector<std::string> kSections = {"ENV_VARS",  "ENV_INIT",   "ENV_SAFETY", "ENV_JUSTICE",
                                            "SYS_INIT",  "SYS_SAFETY", "SYS_JUSTICE"};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Prop conjoin(const std::vector<Prop>& fs) {
    if (fs.empty()) return Prop::make_true();
    Prop acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) acc = Prop::conj(std::move(acc), fs[i]);
    return acc;
}

}  // namespace

void Gr1Spec::validate_atoms(const std::set<std::string>& sys_atoms) const {
    std::set<std::string> universe(env_vars.begin(), env_vars.end());
    universe.insert(sys_atoms.begin(), sys_atoms.end());
    auto check = [&](const Prop& f, const std::string& where) {
        std::set<std::string> cur, nxt;
        f.collect_atoms(cur, nxt);
        for (const auto& a : cur)
            if (!universe.count(a))
                throw std::invalid_argument(where + ": unknown atom '" + a + "'");
        for (const auto& a : nxt)
            if (!universe.count(a))
                throw std::invalid_argument(where + ": unknown atom '" + a + "'");
    };
    check(env_init, "ENV_INIT");
    for (const auto& f : env_safety) check(f, "ENV_SAFETY");
    for (const auto& f : env_justice) check(f, "ENV_JUSTICE");
    check(sys_init, "SYS_INIT");
    for (const auto& f : sys_safety) check(f, "SYS_SAFETY");
    for (const auto& f : sys_justice) check(f, "SYS_JUSTICE");
}

Gr1Spec parse_gr1(const std::string& document) {
    std::map<std::string, std::vector<std::string>> sections;
    std::string current;
    std::istringstream in(document);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        bool is_header = false;
        for (const auto& s : kSections)
            if (line == s) {
                current = s;
                sections[s];  // mark present even when empty
                is_header = true;
                break;
            }
        if (is_header) continue;
        if (current.empty())
            throw std::invalid_argument("spec file line " + std::to_string(lineno) +
                                        ": content before any section header");
        sections[current].push_back(line);
    }
    for (const auto& s : kSections)
        if (!sections.count(s)) throw std::invalid_argument("spec file: missing section " + s);

    Gr1Spec spec;
    for (const auto& v : sections["ENV_VARS"]) {
        for (char c : v)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                throw std::invalid_argument("ENV_VARS: bad atom name '" + v + "'");
        spec.env_vars.push_back(v);
    }
    std::set<std::string> env_set(spec.env_vars.begin(), spec.env_vars.end());
    if (env_set.size() != spec.env_vars.size())
        throw std::invalid_argument("ENV_VARS: duplicate atom");

    auto parse_lines = [](const std::vector<std::string>& lines, const std::string& where) {
        std::vector<Prop> out;
        for (const auto& l : lines) {
            try {
                out.push_back(parse_prop(l));
            } catch (const ParseError& e) {
                throw std::invalid_argument(where + " line '" + l + "': " + e.what());
            }
        }
        return out;
    };

    auto forbid_next = [](const std::vector<Prop>& fs, const std::string& where) {
        for (const auto& f : fs)
            if (f.contains_next())
                throw std::invalid_argument(where + ": next operator not allowed here");
    };

    spec.env_init = conjoin(parse_lines(sections["ENV_INIT"], "ENV_INIT"));
    if (spec.env_init.contains_next()) throw std::invalid_argument("ENV_INIT: next operator not allowed");
    {
        std::set<std::string> cur, nxt;
        spec.env_init.collect_atoms(cur, nxt);
        for (const auto& a : cur)
            if (!env_set.count(a))
                throw std::invalid_argument("ENV_INIT: '" + a + "' is not an environment atom");
    }

    spec.env_safety = parse_lines(sections["ENV_SAFETY"], "ENV_SAFETY");
    for (const auto& f : spec.env_safety) {
        std::set<std::string> cur, nxt;
        f.collect_atoms(cur, nxt);
        for (const auto& a : nxt)
            if (!env_set.count(a))
                throw std::invalid_argument("ENV_SAFETY: X(" + a + ") constrains a non-environment atom");
    }

    spec.env_justice = parse_lines(sections["ENV_JUSTICE"], "ENV_JUSTICE");
    forbid_next(spec.env_justice, "ENV_JUSTICE");
    if (spec.env_justice.empty()) spec.env_justice.push_back(Prop::make_true());

    spec.sys_init = conjoin(parse_lines(sections["SYS_INIT"], "SYS_INIT"));
    if (spec.sys_init.contains_next()) throw std::invalid_argument("SYS_INIT: next operator not allowed");

    spec.sys_safety = parse_lines(sections["SYS_SAFETY"], "SYS_SAFETY");
    forbid_next(spec.sys_safety, "SYS_SAFETY");

    spec.sys_justice = parse_lines(sections["SYS_JUSTICE"], "SYS_JUSTICE");
    forbid_next(spec.sys_justice, "SYS_JUSTICE");
    if (spec.sys_justice.empty()) spec.sys_justice.push_back(Prop::make_true());

    return spec;
}

Gr1Spec load_gr1_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_gr1(ss.str());
}

}  // namespace swarm
