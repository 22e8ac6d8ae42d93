#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtdgrid/types.hpp"

namespace mtdgrid {

struct Bus {
    int id = 0;  // 1-based, contiguous
    double load_mw = 0.0;
    bool is_slack = false;
};

struct Branch {
    int id = 0;  // 1-based, contiguous; orientation is (from_bus -> to_bus)
    int from_bus = 0;
    int to_bus = 0;
    double reactance = 0.0;  // p.u.
    double x_min = 0.0;      // D-FACTS range, p.u.
    double x_max = 0.0;
    double flow_limit_mw = 0.0;  // +inf when unlimited
    bool has_dfacts = false;
};

struct Generator {
    int bus = 0;
    double g_min_mw = 0.0;
    double g_max_mw = 0.0;
    double cost_per_mwh = 0.0;
    double ramp_limit_mw = 0.0;  // per decision interval
};

/// Immutable network model. Construction performs only size/index checks so
/// that invalid grids can still be built and inspected through validate().
class Grid {
public:
    Grid(std::vector<Bus> buses, std::vector<Branch> branches,
         std::vector<Generator> generators);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const std::vector<Generator>& generators() const { return generators_; }

    int bus_count() const { return static_cast<int>(buses_.size()); }
    int branch_count() const { return static_cast<int>(branches_.size()); }

    /// 1-based id of the slack bus; -1 if absent or duplicated.
    int slack_bus() const { return slack_; }

    const Bus& bus(int id) const { return buses_.at(static_cast<std::size_t>(id - 1)); }

    /// Branch lookup by id. Ids stay stable across without_branches() copies,
    /// so they are labels, not positions; use position_of for matrix columns.
    const Branch& branch(int id) const { return branches_.at(position_of(id)); }
    std::size_t position_of(int branch_id) const;
    bool has_branch(int branch_id) const;

    Vec loads_mw() const;

    /// Number of measurement channels M = N + 2L.
    int channel_count() const { return bus_count() + 2 * branch_count(); }

    /// Copy with one branch's reactance replaced (range not enforced here).
    Grid with_reactance(int branch_id, double x) const;

    /// Copy with a set of branches removed; remaining branches keep their ids.
    Grid without_branches(const std::vector<int>& branch_ids) const;

private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<Generator> generators_;
    std::map<int, std::size_t> branch_pos_;
    int slack_ = -1;
};

enum class ViolationKind {
    DuplicateSlack,
    MissingSlack,
    NonContiguousBusIds,
    NonContiguousBranchIds,
    DanglingBusReference,
    NonPositiveReactance,
    SelfLoop,
    ReactanceOutsideRange,
    FrozenRangeMismatch,  // has_dfacts = false but x_min != x or x_max != x
    NegativeLoad,
    GeneratorBoundsInverted,
    GeneratorDanglingBus,
    NonPositiveFlowLimit,
    Disconnected,
};

struct Violation {
    ViolationKind kind;
    std::string detail;
};

std::string to_string(ViolationKind kind);

/// Full invariant check; empty result iff the grid is valid.
std::vector<Violation> validate(const Grid& grid);

/// Thrown by parse_case on malformed text (carries 1-based line number).
class CaseSyntaxError : public std::runtime_error {
public:
    CaseSyntaxError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Thrown by parse_case when the parsed tables violate grid invariants.
class CaseSemanticError : public std::runtime_error {
public:
    explicit CaseSemanticError(const std::string& what, std::vector<Violation> violations)
        : std::runtime_error(what), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

struct ParseResult {
    Grid grid;
    std::vector<std::string> warnings;
};

/// Parse a MATPOWER-style case. Reads bus (id, type, Pd), branch
/// (from, to, x, rateA), gen (bus, Pmax, Pmin, ramp when present) and a
/// linear gencost coefficient; everything else is ignored with a warning.
/// An optional sidecar config declares D-FACTS ranges (see parse_sidecar).
ParseResult parse_case(const std::string& text);
ParseResult parse_case(const std::string& text, const std::string& sidecar_text);

/// Canonical case text such that parse_case(serialize_case(g)).grid == g.
std::string serialize_case(const Grid& grid);

/// Reduced branch-bus incidence matrix, (N-1) x L: column l carries +1 at the
/// from-bus row and -1 at the to-bus row, with the slack row removed.
Mat reduced_incidence(const Grid& grid);

/// Full incidence, N x L (all buses).
Mat full_incidence(const Grid& grid);

bool operator==(const Bus& a, const Bus& b);
bool operator==(const Branch& a, const Branch& b);
bool operator==(const Generator& a, const Generator& b);
bool operator==(const Grid& a, const Grid& b);

}  // namespace mtdgrid
