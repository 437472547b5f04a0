#pragma once

// Operational form of the representation of a closed system's behaviors as the
// limit of an approximation function iterated from the initial behavior.
// `progress` advances every partial behavior by one delivery in every possible
// way; `explore` walks the same tree depth-first up to a delivery bound and
// hands each leaf to a sink.

#include <pgc/actor/runtime.hpp>
#include <pgc/trace/from_execution.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace pgc::progression {

template <class S>
struct PartialBehavior {
    actor::Configuration<S> config;
    std::vector<EnvelopeId> history;
    bool complete = false;

    std::size_t stage() const noexcept { return history.size(); }
};

template <class S>
struct BehaviorSet {
    std::size_t stage = 0;
    std::vector<PartialBehavior<S>> behaviors;  // sorted by history

    std::vector<std::vector<EnvelopeId>> histories() const {
        std::vector<std::vector<EnvelopeId>> out;
        out.reserve(behaviors.size());
        for (const auto& b : behaviors) out.push_back(b.history);
        return out;
    }
    bool all_complete() const noexcept {
        return std::all_of(behaviors.begin(), behaviors.end(), [](const auto& b) { return b.complete; });
    }
};

template <class S>
BehaviorSet<S> bottom(const actor::System<S>& system) {
    if (!system.sealed()) throw ModelingFault("bottom of an unsealed system");
    BehaviorSet<S> out;
    PartialBehavior<S> b;
    b.config = system.initial();
    b.complete = b.config.complete();
    out.behaviors.push_back(std::move(b));
    return out;
}

namespace detail {

template <class S>
std::vector<PartialBehavior<S>> successors(const actor::System<S>& system, const PartialBehavior<S>& b) {
    std::vector<PartialBehavior<S>> out;
    if (b.complete) {
        out.push_back(b);
        return out;
    }
    for (const auto& env : actor::enabled(b.config)) {
        PartialBehavior<S> next;
        next.config = system.deliver(b.config, env.id);
        next.history = b.history;
        next.history.push_back(env.id);
        next.complete = next.config.complete();
        out.push_back(std::move(next));
    }
    return out;
}

/// Runs `work(i)` for i in [0, count) on `jobs` threads, rethrowing the first
/// exception after all threads stop.
template <class Work>
void parallel_for(std::size_t count, unsigned jobs, Work&& work) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const unsigned n = std::min<std::size_t>(jobs, count);
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                if (failed.load()) return;
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// One step of the approximation function: each incomplete behavior is replaced
/// by one successor per enabled envelope; complete behaviors carry over.
template <class S>
BehaviorSet<S> progress(const actor::System<S>& system, const BehaviorSet<S>& set, unsigned jobs = 1) {
    std::vector<std::vector<PartialBehavior<S>>> parts(set.behaviors.size());
    detail::parallel_for(set.behaviors.size(), jobs, [&](std::size_t i) { parts[i] = detail::successors(system, set.behaviors[i]); });
    BehaviorSet<S> out;
    out.stage = set.stage + 1;
    for (auto& p : parts) {
        for (auto& b : p) out.behaviors.push_back(std::move(b));
    }
    std::sort(out.behaviors.begin(), out.behaviors.end(), [](const auto& a, const auto& b) { return a.history < b.history; });
    return out;
}

// ---------------------------------------------------------------------------
// Bounded exploration
// ---------------------------------------------------------------------------

enum class Strategy { exhaustive, random };

/// `sleep_sets` keeps one schedule per causally distinct trace. Off by default.
enum class Reduction { none, sleep_sets };

struct ExploreOptions {
    std::size_t bound = 0;
    Strategy strategy = Strategy::exhaustive;
    std::uint64_t seed = 0;
    std::size_t samples = 1;
    unsigned jobs = 1;
    std::size_t limit = 0;  // maximum number of leaves; 0 = unlimited
    Reduction reduction = Reduction::none;
    std::optional<std::chrono::steady_clock::duration> time_budget;
};

class ExplorationLimit : public Error {
public:
    using Error::Error;
};

struct ExploreStats {
    std::size_t schedules = 0;
    std::size_t complete = 0;
    std::size_t truncated = 0;

    void merge(const ExploreStats& o) {
        schedules += o.schedules;
        complete += o.complete;
        truncated += o.truncated;
    }
    friend bool operator==(const ExploreStats&, const ExploreStats&) = default;
};

/// A maximal explored schedule: complete, or cut off at the bound.
template <class S>
class Leaf {
public:
    Leaf(const actor::System<S>& system, const actor::Configuration<S>& config, bool truncated)
        : system_(system), config_(config), truncated_(truncated) {}

    const actor::Configuration<S>& config() const noexcept { return config_; }
    bool truncated() const noexcept { return truncated_; }
    std::vector<EnvelopeId> history() const { return config_.log.history(); }

    const trace::Trace& trace() const {
        if (!trace_) trace_ = trace::from_execution(config_, system_, truncated_);
        return *trace_;
    }

private:
    const actor::System<S>& system_;
    const actor::Configuration<S>& config_;
    bool truncated_;
    mutable std::optional<trace::Trace> trace_;
};

template <class Sink>
struct Explored {
    Sink sink;
    ExploreStats stats;
};

namespace detail {

struct Asleep {
    EnvelopeId id;
    ActorId target;
};

template <class S>
struct Node {
    actor::Configuration<S> config;
    std::vector<Asleep> sleep;
    bool leaf = false;
};

class Budget {
public:
    explicit Budget(const ExploreOptions& o) : limit_(o.limit) {
        if (o.time_budget) deadline_ = std::chrono::steady_clock::now() + *o.time_budget;
    }

    void count_leaf() {
        std::size_t n = leaves_.fetch_add(1) + 1;
        if (limit_ != 0 && n > limit_) throw ExplorationLimit("exploration exceeded the limit of " + std::to_string(limit_) + " schedules");
    }
    void tick() {
        if (!deadline_) return;
        if ((ticks_.fetch_add(1) & 0x3ff) == 0 && std::chrono::steady_clock::now() > *deadline_) {
            throw ExplorationLimit("exploration exceeded its time budget");
        }
    }

private:
    std::size_t limit_;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
    std::atomic<std::size_t> leaves_{0};
    std::atomic<std::size_t> ticks_{0};
};

/// Children of a node in canonical (envelope id) order, with sleep sets when
/// the reduction is on. Deliveries to different actors commute, so a sleeping
/// envelope stays asleep until something is delivered to its target.
template <class S>
std::vector<Node<S>> expand(const actor::System<S>& system, const Node<S>& node, bool reduce) {
    std::vector<Node<S>> out;
    std::vector<Asleep> done;
    for (const auto& env : actor::enabled(node.config)) {
        if (reduce) {
            auto asleep = std::any_of(node.sleep.begin(), node.sleep.end(), [&](const Asleep& z) { return z.id == env.id; });
            if (asleep) continue;
        }
        Node<S> child;
        child.config = system.deliver(node.config, env.id);
        if (reduce) {
            for (const std::vector<Asleep>* src : {&node.sleep, static_cast<const std::vector<Asleep>*>(&done)}) {
                for (const auto& z : *src) {
                    if (z.target != env.target) child.sleep.push_back(z);
                }
            }
            done.push_back(Asleep{env.id, env.target});
        }
        out.push_back(std::move(child));
    }
    return out;
}

template <class S, class Sink>
void dfs(const actor::System<S>& system, const Node<S>& node, std::size_t depth, const ExploreOptions& opt, Budget& budget,
         Sink& sink, ExploreStats& stats) {
    budget.tick();
    const bool complete = node.config.complete();
    if (complete || depth >= opt.bound) {
        budget.count_leaf();
        ++stats.schedules;
        ++(complete ? stats.complete : stats.truncated);
        sink.visit(Leaf<S>(system, node.config, !complete));
        return;
    }
    // sleep-set blocked nodes add nothing new
    for (const auto& child : expand(system, node, opt.reduction == Reduction::sleep_sets)) {
        dfs(system, child, depth + 1, opt, budget, sink, stats);
    }
}

// Frontier size used to split the tree into independent subtrees. Fixed so
// that the partition, and therefore every merge, is the same for any job count.
inline constexpr std::size_t kFrontierTarget = 64;
inline constexpr std::size_t kSamplesPerChunk = 64;

}  // namespace detail

/// Explores schedules up to `options.bound` deliveries. Each leaf is passed to
/// a copy of `prototype` owned by one subtree; copies are merged left to right
/// so the result is identical for any `options.jobs`.
///
/// Sink requirements: copyable, `void visit(const Leaf<S>&)`, and
/// `void merge(Sink&&)` appending the later sink's results.
template <class S, class Sink>
Explored<Sink> explore(const actor::System<S>& system, const ExploreOptions& options, const Sink& prototype) {
    if (!system.sealed()) throw ModelingFault("explore of an unsealed system");
    detail::Budget budget(options);

    if (options.strategy == Strategy::random) {
        const std::size_t chunks = (options.samples + detail::kSamplesPerChunk - 1) / detail::kSamplesPerChunk;
        std::vector<Sink> sinks(chunks, prototype);
        std::vector<ExploreStats> stats(chunks);
        const auto root = system.initial();
        detail::parallel_for(chunks, options.jobs, [&](std::size_t c) {
            const std::size_t first = c * detail::kSamplesPerChunk;
            const std::size_t last = std::min(options.samples, first + detail::kSamplesPerChunk);
            for (std::size_t k = first; k < last; ++k) {
                std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                                  static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
                std::mt19937_64 rng(seq);
                actor::Configuration<S> config = root;
                std::size_t depth = 0;
                while (!config.complete() && depth < options.bound) {
                    budget.tick();
                    const auto& en = actor::enabled(config);
                    std::uniform_int_distribution<std::size_t> pick(0, en.size() - 1);
                    config = system.deliver(config, en[pick(rng)].id);
                    ++depth;
                }
                budget.count_leaf();
                ++stats[c].schedules;
                ++(config.complete() ? stats[c].complete : stats[c].truncated);
                sinks[c].visit(Leaf<S>(system, config, !config.complete()));
            }
        });
        Explored<Sink> out{prototype, {}};
        if (!sinks.empty()) out.sink = std::move(sinks.front());
        for (std::size_t c = 0; c < chunks; ++c) {
            if (c > 0) out.sink.merge(std::move(sinks[c]));
            out.stats.merge(stats[c]);
        }
        return out;
    }

    const bool reduce = options.reduction == Reduction::sleep_sets;
    // breadth-first split into subtrees, preserving canonical order
    std::vector<detail::Node<S>> frontier;
    std::vector<std::size_t> depths;
    frontier.push_back(detail::Node<S>{system.initial(), {}, false});
    depths.push_back(0);
    for (;;) {
        bool expandable = false;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            if (!frontier[i].config.complete() && depths[i] < options.bound) expandable = true;
        }
        if (!expandable || frontier.size() >= detail::kFrontierTarget) break;
        std::vector<detail::Node<S>> next;
        std::vector<std::size_t> next_depths;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            if (frontier[i].config.complete() || depths[i] >= options.bound) {
                next.push_back(std::move(frontier[i]));
                next_depths.push_back(depths[i]);
                continue;
            }
            budget.tick();
            for (auto& child : detail::expand(system, frontier[i], reduce)) {
                next.push_back(std::move(child));
                next_depths.push_back(depths[i] + 1);
            }
        }
        frontier = std::move(next);
        depths = std::move(next_depths);
    }

    std::vector<Sink> sinks(frontier.size(), prototype);
    std::vector<ExploreStats> stats(frontier.size());
    detail::parallel_for(frontier.size(), options.jobs, [&](std::size_t i) {
        detail::dfs(system, frontier[i], depths[i], options, budget, sinks[i], stats[i]);
    });

    Explored<Sink> out{prototype, {}};
    if (!sinks.empty()) out.sink = std::move(sinks.front());
    for (std::size_t i = 0; i < sinks.size(); ++i) {
        if (i > 0) out.sink.merge(std::move(sinks[i]));
        out.stats.merge(stats[i]);
    }
    return out;
}

/// Sink that keeps every trace.
struct TraceCollector {
    std::vector<trace::Trace> traces;

    template <class S>
    void visit(const Leaf<S>& leaf) {
        traces.push_back(leaf.trace());
    }
    void merge(TraceCollector&& later) {
        for (auto& t : later.traces) traces.push_back(std::move(t));
    }
};

/// Sink that keeps only the schedules, in visiting order.
struct HistoryCollector {
    std::vector<std::vector<EnvelopeId>> histories;
    std::vector<bool> truncated;

    template <class S>
    void visit(const Leaf<S>& leaf) {
        histories.push_back(leaf.history());
        truncated.push_back(leaf.truncated());
    }
    void merge(HistoryCollector&& later) {
        for (auto& h : later.histories) histories.push_back(std::move(h));
        truncated.insert(truncated.end(), later.truncated.begin(), later.truncated.end());
    }
};

template <class S>
struct ExploreResult {
    std::vector<trace::Trace> traces;
    ExploreStats stats;
};

template <class S>
ExploreResult<S> explore_traces(const actor::System<S>& system, const ExploreOptions& options) {
    auto r = explore(system, options, TraceCollector{});
    return ExploreResult<S>{std::move(r.sink.traces), r.stats};
}

/// Re-executes a recorded schedule from the initial configuration. Throws
/// actor::NotEnabled if some delivery is not possible at its turn.
template <class S>
actor::Configuration<S> replay(const actor::System<S>& system, const std::vector<EnvelopeId>& schedule) {
    auto config = system.initial();
    for (const auto& id : schedule) config = system.deliver(config, id);
    return config;
}

}  // namespace pgc::progression
