#include "mtdgrid/grid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "mtdgrid/config.hpp"

namespace mtdgrid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRangeTol = 1e-12;
}  // namespace

Grid::Grid(std::vector<Bus> buses, std::vector<Branch> branches,
           std::vector<Generator> generators)
    : buses_(std::move(buses)), branches_(std::move(branches)),
      generators_(std::move(generators)) {
    int slack_count = 0;
    for (const auto& b : buses_) {
        if (b.is_slack) {
            ++slack_count;
            slack_ = b.id;
        }
    }
    if (slack_count != 1) slack_ = -1;
    for (std::size_t i = 0; i < branches_.size(); ++i) branch_pos_[branches_[i].id] = i;
}

std::size_t Grid::position_of(int branch_id) const {
    auto it = branch_pos_.find(branch_id);
    if (it == branch_pos_.end())
        throw std::out_of_range("no branch with id " + std::to_string(branch_id));
    return it->second;
}

bool Grid::has_branch(int branch_id) const { return branch_pos_.count(branch_id) > 0; }

Vec Grid::loads_mw() const {
    Vec d(bus_count());
    for (int i = 0; i < bus_count(); ++i) d[i] = buses_[static_cast<std::size_t>(i)].load_mw;
    return d;
}

Grid Grid::with_reactance(int branch_id, double x) const {
    auto branches = branches_;
    branches.at(position_of(branch_id)).reactance = x;
    return Grid(buses_, std::move(branches), generators_);
}

Grid Grid::without_branches(const std::vector<int>& branch_ids) const {
    std::set<int> drop(branch_ids.begin(), branch_ids.end());
    std::vector<Branch> kept;
    kept.reserve(branches_.size());
    for (const auto& br : branches_)
        if (!drop.count(br.id)) kept.push_back(br);
    return Grid(buses_, std::move(kept), generators_);
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::DuplicateSlack: return "DuplicateSlack";
        case ViolationKind::MissingSlack: return "MissingSlack";
        case ViolationKind::NonContiguousBusIds: return "NonContiguousBusIds";
        case ViolationKind::NonContiguousBranchIds: return "NonContiguousBranchIds";
        case ViolationKind::DanglingBusReference: return "DanglingBusReference";
        case ViolationKind::NonPositiveReactance: return "NonPositiveReactance";
        case ViolationKind::SelfLoop: return "SelfLoop";
        case ViolationKind::ReactanceOutsideRange: return "ReactanceOutsideRange";
        case ViolationKind::FrozenRangeMismatch: return "FrozenRangeMismatch";
        case ViolationKind::NegativeLoad: return "NegativeLoad";
        case ViolationKind::GeneratorBoundsInverted: return "GeneratorBoundsInverted";
        case ViolationKind::GeneratorDanglingBus: return "GeneratorDanglingBus";
        case ViolationKind::NonPositiveFlowLimit: return "NonPositiveFlowLimit";
        case ViolationKind::Disconnected: return "Disconnected";
    }
    return "Unknown";
}

std::vector<Violation> validate(const Grid& grid) {
    std::vector<Violation> out;
    const auto& buses = grid.buses();
    const auto& branches = grid.branches();
    const int n = grid.bus_count();

    int slack_count = 0;
    for (int i = 0; i < n; ++i) {
        const Bus& b = buses[static_cast<std::size_t>(i)];
        if (b.id != i + 1)
            out.push_back({ViolationKind::NonContiguousBusIds,
                           "bus at position " + std::to_string(i + 1) + " has id " +
                               std::to_string(b.id)});
        if (b.is_slack) ++slack_count;
        if (b.load_mw < 0)
            out.push_back({ViolationKind::NegativeLoad, "bus " + std::to_string(b.id)});
    }
    if (slack_count == 0) out.push_back({ViolationKind::MissingSlack, ""});
    if (slack_count > 1)
        out.push_back({ViolationKind::DuplicateSlack,
                       std::to_string(slack_count) + " slack buses"});

    auto valid_bus = [&](int id) { return id >= 1 && id <= n; };

    for (std::size_t i = 0; i < branches.size(); ++i) {
        const Branch& br = branches[i];
        const std::string tag = "branch " + std::to_string(br.id);
        if (br.id != static_cast<int>(i) + 1)
            out.push_back({ViolationKind::NonContiguousBranchIds, tag});
        if (!valid_bus(br.from_bus) || !valid_bus(br.to_bus)) {
            out.push_back({ViolationKind::DanglingBusReference,
                           tag + " references bus " +
                               std::to_string(valid_bus(br.from_bus) ? br.to_bus : br.from_bus)});
            continue;
        }
        if (br.from_bus == br.to_bus) out.push_back({ViolationKind::SelfLoop, tag});
        if (!(br.reactance > 0))
            out.push_back({ViolationKind::NonPositiveReactance, tag});
        if (br.reactance < br.x_min - kRangeTol || br.reactance > br.x_max + kRangeTol)
            out.push_back({ViolationKind::ReactanceOutsideRange, tag});
        if (!br.has_dfacts &&
            (std::abs(br.x_min - br.reactance) > kRangeTol ||
             std::abs(br.x_max - br.reactance) > kRangeTol))
            out.push_back({ViolationKind::FrozenRangeMismatch, tag});
        if (!(br.flow_limit_mw > 0))
            out.push_back({ViolationKind::NonPositiveFlowLimit, tag});
    }

    for (const auto& g : grid.generators()) {
        if (!valid_bus(g.bus))
            out.push_back({ViolationKind::GeneratorDanglingBus,
                           "generator at bus " + std::to_string(g.bus)});
        if (g.g_min_mw > g.g_max_mw)
            out.push_back({ViolationKind::GeneratorBoundsInverted,
                           "generator at bus " + std::to_string(g.bus)});
    }

    // Connectivity by BFS over well-formed branches.
    if (n > 0) {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n + 1));
        for (const auto& br : branches) {
            if (valid_bus(br.from_bus) && valid_bus(br.to_bus) && br.from_bus != br.to_bus) {
                adj[static_cast<std::size_t>(br.from_bus)].push_back(br.to_bus);
                adj[static_cast<std::size_t>(br.to_bus)].push_back(br.from_bus);
            }
        }
        std::vector<char> seen(static_cast<std::size_t>(n + 1), 0);
        std::queue<int> q;
        q.push(1);
        seen[1] = 1;
        int reached = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    ++reached;
                    q.push(v);
                }
        }
        if (reached != n)
            out.push_back({ViolationKind::Disconnected,
                           std::to_string(n - reached) + " buses unreachable from bus 1"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// MATPOWER-style case parser
// ---------------------------------------------------------------------------

namespace {

struct RawTable {
    std::vector<std::vector<double>> rows;
    std::vector<int> line_numbers;
};

// Extract "name = [ rows ];" tables. Rows are whitespace-separated numbers,
// one row per line, optional trailing ';'.
class CaseScanner {
public:
    explicit CaseScanner(const std::string& text) {
        std::stringstream ss(text);
        std::string line;
        int ln = 0;
        while (std::getline(ss, line)) {
            ++ln;
            lines_.emplace_back(ln, strip(line));
        }
    }

    bool has_table(const std::string& name) const { return find_start(name) >= 0; }

    RawTable table(const std::string& name) const {
        int start = find_start(name);
        if (start < 0) throw CaseSyntaxError(1, "missing table: " + name);
        RawTable t;
        for (std::size_t i = static_cast<std::size_t>(start); i < lines_.size(); ++i) {
            auto [ln, s] = lines_[i];
            if (i == static_cast<std::size_t>(start)) {
                auto pos = s.find('[');
                s = pos == std::string::npos ? "" : s.substr(pos + 1);
            }
            bool closed = false;
            auto pos = s.find(']');
            if (pos != std::string::npos) {
                s = s.substr(0, pos);
                closed = true;
            }
            if (!s.empty()) {
                std::vector<double> row = parse_row(s, ln);
                if (!row.empty()) {
                    t.rows.push_back(std::move(row));
                    t.line_numbers.push_back(ln);
                }
            }
            if (closed) return t;
        }
        throw CaseSyntaxError(lines_.empty() ? 1 : lines_.back().first,
                              "unterminated table: " + name);
    }

    double scalar_or(const std::string& name, double fallback) const {
        for (auto [ln, s] : lines_) {
            auto eq = s.find('=');
            if (eq == std::string::npos) continue;
            if (strip_str(s.substr(0, eq)) != name) continue;
            std::string rhs = strip_str(s.substr(eq + 1));
            if (!rhs.empty() && rhs.back() == ';') rhs.pop_back();
            rhs = strip_str(rhs);
            try {
                std::size_t used = 0;
                double v = std::stod(rhs, &used);
                if (used == rhs.size()) return v;
            } catch (...) {
            }
            throw CaseSyntaxError(ln, "malformed scalar: " + name);
        }
        return fallback;
    }

private:
    static std::string strip_str(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static std::string strip(const std::string& line) {
        auto pos = line.find('%');
        std::string s = pos == std::string::npos ? line : line.substr(0, pos);
        pos = s.find('#');
        if (pos != std::string::npos) s = s.substr(0, pos);
        return strip_str(s);
    }

    int find_start(const std::string& name) const {
        for (std::size_t i = 0; i < lines_.size(); ++i) {
            const std::string& s = lines_[i].second;
            auto eq = s.find('=');
            if (eq == std::string::npos) continue;
            if (strip_str(s.substr(0, eq)) != name) continue;
            if (s.find('[', eq) != std::string::npos) return static_cast<int>(i);
        }
        return -1;
    }

    static std::vector<double> parse_row(const std::string& s, int ln) {
        std::vector<double> row;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() &&
                   (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ';' || s[i] == ','))
                ++i;
            if (i >= s.size()) break;
            std::size_t j = i;
            while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) &&
                   s[j] != ';' && s[j] != ',')
                ++j;
            const std::string tok = s.substr(i, j - i);
            try {
                std::size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                row.push_back(v);
            } catch (...) {
                throw CaseSyntaxError(ln, "not a number: '" + tok + "' (column " +
                                              std::to_string(i + 1) + ")");
            }
            i = j;
        }
        return row;
    }

    std::vector<std::pair<int, std::string>> lines_;
};

struct SidecarSpec {
    double min_factor = 0.8;
    double max_factor = 1.2;
    bool all_dfacts = true;
    std::set<int> dfacts_ids;  // used when !all_dfacts
    std::map<int, double> x_min_override;
    std::map<int, double> x_max_override;
};

SidecarSpec parse_sidecar(const std::string& text) {
    SidecarSpec spec;
    Config cfg = Config::parse(text);
    spec.min_factor = cfg.number_or("default_min_factor", 0.8);
    spec.max_factor = cfg.number_or("default_max_factor", 1.2);
    if (cfg.has("dfacts")) {
        const ConfigValue& v = cfg.at("dfacts");
        if (v.is_string()) {
            if (v.str() == "all") {
                spec.all_dfacts = true;
            } else if (v.str() == "none") {
                spec.all_dfacts = false;
            } else {
                throw ConfigError("dfacts must be \"all\", \"none\", or an id list");
            }
        } else {
            spec.all_dfacts = false;
            for (double d : v.numbers()) spec.dfacts_ids.insert(static_cast<int>(d));
        }
    }
    for (const std::string& key : cfg.keys_with_prefix("x_min."))
        spec.x_min_override[std::stoi(key.substr(6))] = cfg.at(key).number();
    for (const std::string& key : cfg.keys_with_prefix("x_max."))
        spec.x_max_override[std::stoi(key.substr(6))] = cfg.at(key).number();
    return spec;
}

ParseResult parse_case_impl(const std::string& text, const SidecarSpec& sidecar) {
    CaseScanner scanner(text);
    std::vector<std::string> warnings;

    const double base_mva = scanner.scalar_or("mpc.baseMVA", kMvaBase);
    if (base_mva != kMvaBase)
        warnings.push_back("baseMVA " + std::to_string(base_mva) +
                           " ignored; all quantities treated on a 100 MVA base");

    RawTable bus_t = scanner.table("mpc.bus");
    RawTable branch_t = scanner.table("mpc.branch");
    RawTable gen_t = scanner.table("mpc.gen");
    const bool has_gencost = scanner.has_table("mpc.gencost");
    RawTable gencost_t = has_gencost ? scanner.table("mpc.gencost") : RawTable{};

    std::vector<Bus> buses;
    bool bus_extra_cols = false;
    for (std::size_t i = 0; i < bus_t.rows.size(); ++i) {
        const auto& r = bus_t.rows[i];
        if (r.size() < 3)
            throw CaseSyntaxError(bus_t.line_numbers[i], "bus row needs id, type, Pd");
        if (r.size() > 3) bus_extra_cols = true;
        Bus b;
        b.id = static_cast<int>(r[0]);
        b.is_slack = static_cast<int>(r[1]) == 3;
        b.load_mw = r[2];
        buses.push_back(b);
    }
    if (bus_extra_cols)
        warnings.push_back("bus table: columns beyond (id, type, Pd) ignored");

    std::vector<Branch> branches;
    bool branch_extra = false;
    bool branch_status_dropped = false;
    for (std::size_t i = 0; i < branch_t.rows.size(); ++i) {
        const auto& r = branch_t.rows[i];
        if (r.size() < 4)
            throw CaseSyntaxError(branch_t.line_numbers[i],
                                  "branch row needs from, to, r, x");
        Branch br;
        br.from_bus = static_cast<int>(r[0]);
        br.to_bus = static_cast<int>(r[1]);
        br.reactance = r[3];
        double rate_a = r.size() > 5 ? r[5] : 0.0;
        br.flow_limit_mw = rate_a > 0 ? rate_a : kInf;  // MATPOWER: 0 = unlimited
        if (r.size() > 10 && static_cast<int>(r[10]) == 0) {
            branch_status_dropped = true;
            continue;  // out-of-service
        }
        if (r.size() > 6) branch_extra = true;
        br.id = static_cast<int>(branches.size()) + 1;
        branches.push_back(br);
    }
    if (branch_extra)
        warnings.push_back("branch table: columns beyond (from, to, r, x, b, rateA) ignored");
    if (branch_status_dropped)
        warnings.push_back("branch table: out-of-service rows (status 0) dropped");

    std::vector<Generator> generators;
    bool gen_extra = false;
    for (std::size_t i = 0; i < gen_t.rows.size(); ++i) {
        const auto& r = gen_t.rows[i];
        Generator g;
        g.bus = static_cast<int>(r.empty() ? 0 : r[0]);
        if (r.size() >= 10) {
            // Full MATPOWER layout: bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin
            if (static_cast<int>(r[7]) == 0) continue;  // out of service
            g.g_max_mw = r[8];
            g.g_min_mw = r[9];
            g.ramp_limit_mw = r.size() > 16 ? r[16] : 0.0;
            if (r.size() > 10) gen_extra = true;
        } else if (r.size() >= 3) {
            // Compact layout: bus Pmax Pmin [ramp]
            g.g_max_mw = r[1];
            g.g_min_mw = r[2];
            g.ramp_limit_mw = r.size() > 3 ? r[3] : 0.0;
        } else {
            throw CaseSyntaxError(gen_t.line_numbers[i], "gen row needs bus, Pmax, Pmin");
        }
        if (g.ramp_limit_mw <= 0) g.ramp_limit_mw = 0.3 * (g.g_max_mw - g.g_min_mw);
        generators.push_back(g);
    }
    if (gen_extra)
        warnings.push_back("gen table: reactive and voltage columns ignored");

    if (has_gencost) {
        for (std::size_t i = 0; i < gencost_t.rows.size() && i < generators.size(); ++i) {
            const auto& r = gencost_t.rows[i];
            double coeff = 0.0;
            if (r.size() == 1) {
                coeff = r[0];
            } else if (r.size() >= 5 && static_cast<int>(r[0]) == 2) {
                // Polynomial cost row: model startup shutdown ncost cN ... c0.
                const int ncost = static_cast<int>(r[3]);
                if (static_cast<int>(r.size()) < 4 + ncost)
                    throw CaseSyntaxError(gencost_t.line_numbers[i], "truncated gencost row");
                coeff = r[static_cast<std::size_t>(4 + ncost - 2)];  // linear term
                if (ncost > 2)
                    warnings.push_back("gencost row " + std::to_string(i + 1) +
                                       ": only the linear coefficient is used");
            } else {
                throw CaseSyntaxError(gencost_t.line_numbers[i],
                                      "unsupported gencost row (need linear polynomial)");
            }
            generators[i].cost_per_mwh = coeff;
        }
    } else {
        warnings.push_back("gencost table missing; generation costs default to 0");
    }

    // D-FACTS ranges from the sidecar.
    for (auto& br : branches) {
        bool has = sidecar.all_dfacts || sidecar.dfacts_ids.count(br.id) > 0;
        br.has_dfacts = has;
        if (has) {
            br.x_min = sidecar.min_factor * br.reactance;
            br.x_max = sidecar.max_factor * br.reactance;
            auto lo = sidecar.x_min_override.find(br.id);
            if (lo != sidecar.x_min_override.end()) br.x_min = lo->second;
            auto hi = sidecar.x_max_override.find(br.id);
            if (hi != sidecar.x_max_override.end()) br.x_max = hi->second;
        } else {
            br.x_min = br.x_max = br.reactance;
        }
    }

    Grid grid(std::move(buses), std::move(branches), std::move(generators));
    auto violations = validate(grid);
    if (!violations.empty()) {
        std::string msg = "invalid case:";
        for (const auto& v : violations) msg += " " + to_string(v.kind) + "(" + v.detail + ")";
        throw CaseSemanticError(msg, std::move(violations));
    }
    return ParseResult{std::move(grid), std::move(warnings)};
}

std::string fmt(double v) {
    if (std::isinf(v)) return "0";  // unlimited flow limit round-trips via rateA = 0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ParseResult parse_case(const std::string& text) { return parse_case_impl(text, SidecarSpec{}); }

ParseResult parse_case(const std::string& text, const std::string& sidecar_text) {
    return parse_case_impl(text, parse_sidecar(sidecar_text));
}

std::string serialize_case(const Grid& grid) {
    std::ostringstream os;
    os << "function mpc = case_export\n";
    os << "mpc.baseMVA = 100;\n";
    os << "mpc.bus = [\n";
    for (const auto& b : grid.buses())
        os << "\t" << b.id << "\t" << (b.is_slack ? 3 : 1) << "\t" << fmt(b.load_mw) << ";\n";
    os << "];\n";
    os << "mpc.branch = [\n";
    for (const auto& br : grid.branches())
        os << "\t" << br.from_bus << "\t" << br.to_bus << "\t0\t" << fmt(br.reactance)
           << "\t0\t" << fmt(br.flow_limit_mw) << ";\n";
    os << "];\n";
    os << "mpc.gen = [\n";
    for (const auto& g : grid.generators())
        os << "\t" << g.bus << "\t" << fmt(g.g_max_mw) << "\t" << fmt(g.g_min_mw) << "\t"
           << fmt(g.ramp_limit_mw) << ";\n";
    os << "];\n";
    os << "mpc.gencost = [\n";
    for (const auto& g : grid.generators()) os << "\t" << fmt(g.cost_per_mwh) << ";\n";
    os << "];\n";
    // Per-branch D-FACTS ranges are not part of the case schema; emit the
    // matching sidecar inline as a comment-free trailer is not possible, so
    // serialize_case only round-trips grids whose ranges follow the default
    // multipliers or are frozen.
    return os.str();
}

Mat reduced_incidence(const Grid& grid) {
    const int n = grid.bus_count();
    const int l = grid.branch_count();
    const int slack = grid.slack_bus();
    Mat a = Mat::Zero(n - 1, l);
    auto row_of = [&](int bus) { return bus < slack ? bus - 1 : bus - 2; };
    for (int c = 0; c < l; ++c) {
        const Branch& br = grid.branches()[static_cast<std::size_t>(c)];
        if (br.from_bus != slack) a(row_of(br.from_bus), c) = 1.0;
        if (br.to_bus != slack) a(row_of(br.to_bus), c) = -1.0;
    }
    return a;
}

Mat full_incidence(const Grid& grid) {
    Mat a = Mat::Zero(grid.bus_count(), grid.branch_count());
    for (int c = 0; c < grid.branch_count(); ++c) {
        const Branch& br = grid.branches()[static_cast<std::size_t>(c)];
        a(br.from_bus - 1, c) = 1.0;
        a(br.to_bus - 1, c) = -1.0;
    }
    return a;
}

bool operator==(const Bus& a, const Bus& b) {
    return a.id == b.id && a.load_mw == b.load_mw && a.is_slack == b.is_slack;
}

bool operator==(const Branch& a, const Branch& b) {
    return a.id == b.id && a.from_bus == b.from_bus && a.to_bus == b.to_bus &&
           a.reactance == b.reactance && a.x_min == b.x_min && a.x_max == b.x_max &&
           a.flow_limit_mw == b.flow_limit_mw && a.has_dfacts == b.has_dfacts;
}

bool operator==(const Generator& a, const Generator& b) {
    return a.bus == b.bus && a.g_min_mw == b.g_min_mw && a.g_max_mw == b.g_max_mw &&
           a.cost_per_mwh == b.cost_per_mwh && a.ramp_limit_mw == b.ramp_limit_mw;
}

bool operator==(const Grid& a, const Grid& b) {
    return a.buses() == b.buses() && a.branches() == b.branches() &&
           a.generators() == b.generators();
}

}  // namespace mtdgrid
