#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <hem/error.hpp>
#include <hem/runtime.hpp>

namespace hem
{

namespace
{

constexpr std::size_t L = batch_lanes;
constexpr std::size_t vec_width = 8;
using vec = double __attribute__((vector_size(vec_width * sizeof(double))));
static_assert(L % vec_width == 0);

// Multiply, then add: the product is rounded first, as in the scalar loop.
__attribute__((target_clones("avx512f", "avx2", "default"))) void run_lanes(const ExecOp *code, std::size_t n,
                                                                             const double *r, double *out)
{
    for (std::size_t k = 0; k < n; ++k) {
        const ExecOp in = code[k];
        const double *a = r + std::size_t(in.lhs) * L;
        const double *b = r + std::size_t(in.rhs) * L;
        const double *c = r + std::size_t(in.addend) * L;
        double *o = out + k * L;
        for (std::size_t l = 0; l < L; l += vec_width) {
            vec va;
            vec vb;
            vec vc;
            std::memcpy(&va, a + l, sizeof va);
            std::memcpy(&vb, b + l, sizeof vb);
            std::memcpy(&vc, c + l, sizeof vc);
            const vec m = va * vb;
            const vec t = m + vc;
            std::memcpy(o + l, &t, sizeof t);
        }
    }
}

} // namespace

Evaluator::Evaluator(const CompiledMap &cm, double guard) : m_map(&cm), m_guard(guard), m_regs(cm.registers)
{
    if (cm.submaps.empty()) {
        throw domain_error("compiled map has no sub-maps");
    }
    m_regs.resize(cm.register_count(), 0.0);
}

State Evaluator::run(const CompiledSubMap &sm, const State &s)
{
    double *__restrict r = m_regs.data();
    r[reg_x] = s.x;
    r[reg_y] = s.y;
    ::sincos(2 * s.x, &r[reg_s], &r[reg_c]);
    double *out = r + sm.exec.temp_base;
    for (const auto &in : sm.exec.code) {
        *out++ = r[in.lhs] * r[in.rhs] + r[in.addend];
    }
    return {r[sm.exec.x_result], r[sm.exec.y_result]};
}

State Evaluator::eval_submap(int i, const State &s)
{
    if (i < 1 || i > m_map->M) {
        throw domain_error("sub-map index " + std::to_string(i) + " outside 1.." + std::to_string(m_map->M));
    }
    return run(m_map->submaps[static_cast<std::size_t>(i - 1)], s);
}

State Evaluator::compose(State s)
{
    for (const auto &sm : m_map->submaps) {
        s = run(sm, s);
    }
    return s;
}

void Evaluator::check(const State &s, std::uint64_t iteration) const
{
    if (!(std::fabs(s.y) <= m_guard) || !std::isfinite(s.x)) {
        throw overflow_error("state left the guard band |y| <= " + std::to_string(m_guard), iteration);
    }
}

State Evaluator::poincare(const State &s)
{
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
        throw domain_error("poincare needs a finite state");
    }
    const auto out = compose(s);
    check(out, 0);
    return out;
}

Trajectory Evaluator::iterate(const State &s0, std::uint64_t n, std::uint64_t stride)
{
    if (n < 1 || stride < 1) {
        throw domain_error("iterate needs n >= 1 and stride >= 1");
    }
    if (!std::isfinite(s0.x) || !std::isfinite(s0.y)) {
        throw domain_error("iterate needs a finite start state");
    }
    Trajectory tr;
    tr.start = s0;
    tr.stride = stride;
    tr.samples.reserve(static_cast<std::size_t>(n / stride));
    State s = s0;
    for (std::uint64_t k = 1; k <= n; ++k) {
        s = compose(s);
        check(s, k);
        if (k % stride == 0) {
            tr.samples.push_back(s);
        }
    }
    return tr;
}

State Evaluator::advance(State s, std::uint64_t n)
{
    if (const auto k = advance_checked(s, n)) {
        check(s, k);
    }
    return s;
}

std::uint64_t Evaluator::advance_checked(State &s, std::uint64_t n)
{
    for (std::uint64_t k = 1; k <= n; ++k) {
        s = compose(s);
        if (!(std::fabs(s.y) <= m_guard) || !std::isfinite(s.x)) {
            return k;
        }
    }
    return 0;
}

BatchEvaluator::BatchEvaluator(const CompiledMap &cm, double guard) : m_map(&cm), m_guard(guard), m_scalar(cm, guard)
{
    if (cm.submaps.empty()) {
        throw domain_error("compiled map has no sub-maps");
    }
    m_regs.assign(cm.register_count() * L, 0.0);
    for (std::size_t i = 0; i < cm.registers.size(); ++i) {
        for (std::size_t l = 0; l < L; ++l) {
            m_regs[i * L + l] = cm.registers[i];
        }
    }
}

void BatchEvaluator::advance(std::span<State> states, std::uint64_t n, std::span<std::uint64_t> overflow_at)
{
    if (overflow_at.size() != states.size()) {
        throw domain_error("overflow_at must match the number of states");
    }
    for (const auto &s : states) {
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
            throw domain_error("advance needs finite states");
        }
    }
    for (std::size_t i = 0; i < states.size(); i += L) {
        const std::size_t count = std::min(L, states.size() - i);
        if (4 * count > L) {
            advance_block(states.data() + i, count, n, overflow_at.data() + i);
            continue;
        }
        // A nearly empty block is cheaper on the scalar path, which gives the same bits.
        for (std::size_t j = i; j < i + count; ++j) {
            overflow_at[j] = m_scalar.advance_checked(states[j], n);
        }
    }
}

void BatchEvaluator::advance_block(State *states, std::size_t count, std::uint64_t n, std::uint64_t *overflow_at)
{
    double x[L];
    double y[L];
    bool live[L];
    for (std::size_t l = 0; l < L; ++l) {
        live[l] = l < count;
        x[l] = live[l] ? states[l].x : 0.0;
        y[l] = live[l] ? states[l].y : 0.0;
        if (l < count) {
            overflow_at[l] = 0;
        }
    }
    std::size_t n_live = count;
    double *r = m_regs.data();
    for (std::uint64_t k = 1; k <= n && n_live > 0; ++k) {
        for (const auto &sm : m_map->submaps) {
            for (std::size_t l = 0; l < L; ++l) {
                r[reg_x * L + l] = x[l];
                r[reg_y * L + l] = y[l];
                ::sincos(2 * x[l], &r[reg_s * L + l], &r[reg_c * L + l]);
            }
            run_lanes(sm.exec.code.data(), sm.exec.code.size(), r, r + std::size_t(sm.exec.temp_base) * L);
            for (std::size_t l = 0; l < L; ++l) {
                x[l] = r[sm.exec.x_result * L + l];
                y[l] = r[sm.exec.y_result * L + l];
            }
        }
        for (std::size_t l = 0; l < L; ++l) {
            if (!live[l]) {
                // Park the lane on a harmless state so it cannot produce NaNs or infinities.
                x[l] = 0;
                y[l] = 0;
                continue;
            }
            if (!(std::fabs(y[l]) <= m_guard) || !std::isfinite(x[l])) {
                states[l] = {x[l], y[l]};
                overflow_at[l] = k;
                live[l] = false;
                --n_live;
                x[l] = 0;
                y[l] = 0;
            }
        }
    }
    for (std::size_t l = 0; l < count; ++l) {
        if (live[l]) {
            states[l] = {x[l], y[l]};
        }
    }
}

State eval_submap(const CompiledMap &cm, int i, const State &s)
{
    return Evaluator(cm).eval_submap(i, s);
}

State poincare(const CompiledMap &cm, const State &s, double guard)
{
    return Evaluator(cm, guard).poincare(s);
}

Trajectory iterate(const CompiledMap &cm, const State &s0, std::uint64_t n, std::uint64_t stride, double guard)
{
    auto tr = Evaluator(cm, guard).iterate(s0, n, stride);
    tr.map_id = map_hash(cm);
    return tr;
}

} // namespace hem
