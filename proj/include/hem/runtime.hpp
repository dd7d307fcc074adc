#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <hem/compiler.hpp>
#include <hem/model.hpp>

namespace hem
{

inline constexpr double default_guard = 50;

struct Trajectory {
    State start;
    // State after every stride-th iteration: samples[k] is P^((k+1) * stride)(start).
    std::vector<State> samples;
    std::uint64_t stride = 1;
    std::uint64_t map_id = 0;
};

// Per-thread workspace for running the programs of one CompiledMap. The map itself is never
// modified and may be shared by any number of evaluators.
class Evaluator
{
public:
    explicit Evaluator(const CompiledMap &cm, double guard = default_guard);

    const CompiledMap &map() const noexcept
    {
        return *m_map;
    }

    // Sub-map i = 1..M.
    State eval_submap(int i, const State &s);
    // The composed map, x unwrapped. Throws overflow_error (iteration 0) if |y| leaves the guard band.
    State poincare(const State &s);
    // n >= 1 iterations, recording every stride-th state.
    Trajectory iterate(const State &s0, std::uint64_t n, std::uint64_t stride = 1);
    // Advance in place without recording; returns the final state.
    State advance(State s, std::uint64_t n);
    // As advance, but stops at the first state outside the guard band, leaves it in s and returns
    // its iteration number; returns 0 if all n iterations stay inside.
    std::uint64_t advance_checked(State &s, std::uint64_t n);

private:
    State run(const CompiledSubMap &sm, const State &s);
    State compose(State s);
    void check(const State &s, std::uint64_t iteration) const;

    const CompiledMap *m_map;
    double m_guard;
    std::vector<double> m_regs;
};

inline constexpr std::size_t batch_lanes = 8;

// Runs batch_lanes trajectories through one instruction stream. Every lane is bit-identical to
// Evaluator::advance on the same state.
class BatchEvaluator
{
public:
    explicit BatchEvaluator(const CompiledMap &cm, double guard = default_guard);

    // Advance every state by n iterations, any number of states. A lane that leaves the guard band
    // stops: its state is the offending one and overflow_at holds the iteration (else 0).
    void advance(std::span<State> states, std::uint64_t n, std::span<std::uint64_t> overflow_at);

private:
    void advance_block(State *states, std::size_t count, std::uint64_t n, std::uint64_t *overflow_at);

    const CompiledMap *m_map;
    double m_guard;
    std::vector<double> m_regs;
    Evaluator m_scalar;
};

State eval_submap(const CompiledMap &cm, int i, const State &s);
State poincare(const CompiledMap &cm, const State &s, double guard = default_guard);
Trajectory iterate(const CompiledMap &cm, const State &s0, std::uint64_t n, std::uint64_t stride = 1,
                   double guard = default_guard);

} // namespace hem
