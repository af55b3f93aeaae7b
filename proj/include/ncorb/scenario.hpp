#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncorb/bitorsor.hpp"
#include "ncorb/dirac.hpp"
#include "ncorb/orbifold.hpp"

namespace ncorb {

struct GraphSpec {
    std::string kind;  // circle | explicit
    int vertices = 0;
    double circumference = 0.0;      // circle
    std::vector<Edge> edges;         // explicit
};

struct ActionSpec {
    std::string kind;  // rotation | reflection | trivial | s3_on_c6 | left_translation | explicit
    int sectors = 2;   // rotation
    int order = 1;     // trivial
    std::string group;  // left_translation / explicit: z2 | s3 | cyclic
    int cyclic_order = 2;
    std::vector<std::vector<int>> table;  // explicit
};

struct BundleSpec {
    std::string kind;  // trivial | alternating | parity_swap
    int rank = 1;      // trivial
};

struct DiracSpec {
    std::string kind;  // circle
    int rank = 1;
    bool drop_grading = false;
};

struct BitorsorSpec {
    std::string kind;  // identity | quotient | corrupted_quotient
};

struct DistanceQuerySpec {
    int x = 0;
    int x_prime = 0;
    bool invariant = false;
};

struct Scenario {
    std::string name;
    std::string description;
    HaarConvention haar = HaarConvention::Counting;
    unsigned seed = 1;
    double tolerance = 1e-10;
    int declared_dimension = 1;
    std::optional<GraphSpec> graph;
    std::optional<ActionSpec> action;
    std::optional<BundleSpec> bundle;
    std::optional<DiracSpec> dirac;
    std::optional<BitorsorSpec> bitorsor;
    std::vector<DistanceQuerySpec> distance_queries;
    std::vector<int> family_sizes;
    std::vector<std::string> tasks;
};

/// Parse a scenario from JSON text; errors carry the offending field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
/// Canonical JSON text (keys sorted); parse(serialize(s)) reproduces s.
std::string serialize_scenario(const Scenario& s);

/// The concrete objects a scenario describes.  Members are empty when the
/// corresponding spec is absent.
struct BuiltScenario {
    std::shared_ptr<const MetricGraph> graph;
    GroupoidPtr groupoid;
    BundlePtr bundle;
    std::optional<DiscreteOrbifold> orbifold;
    std::optional<SpectralTripleData> triple;
    BitorsorPtr bitorsor;
};

/// Construct everything the scenario describes, throwing StructuralError or
/// ContractError on inconsistent input.
BuiltScenario build_scenario(const Scenario& s);

struct TaskResult {
    std::string task;
    bool passed = false;
    std::string failure;
    /// Key-value details for the report, in output order.
    std::vector<std::pair<std::string, std::string>> details;
    /// Optional table (deterministic CSV, 12 significant digits).
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
};

struct RunResult {
    std::vector<TaskResult> tasks;
    bool passed = false;
};

/// Known tasks: validate, imprimitivity, morita, distance, theorem3,
/// spectrum, prop5.  Throws StructuralError for unknown names and
/// ContractError when the scenario lacks what the task needs.
TaskResult run_task(const Scenario& s, const std::string& task);

/// Run the scenario's own task list.
RunResult run_scenario(const Scenario& s);

/// Schema-versioned JSON report of a run.
void write_report(std::ostream& out, const Scenario& s, const RunResult& r);

/// The task's table as CSV; header plus rows, no trailing spaces.
void write_task_csv(std::ostream& out, const TaskResult& t);

}  // namespace ncorb
