#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <hem/model.hpp>
#include <hem/series.hpp>

namespace hem
{

// r[dst] = r[lhs] * r[rhs] + r[addend]. An addition uses rhs == reg_one, a multiplication uses
// addend == reg_zero, so every instruction is exactly one arithmetic operation and the result
// is the same whether or not the compiler contracts it into an FMA.
struct Instruction {
    std::uint32_t dst;
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t addend;

    bool is_add() const noexcept;
    friend bool operator==(const Instruction &, const Instruction &) = default;
};

inline constexpr std::uint32_t reg_zero = 0;
inline constexpr std::uint32_t reg_one = 1;
inline constexpr std::uint32_t reg_x = 2;
inline constexpr std::uint32_t reg_y = 3;
inline constexpr std::uint32_t reg_c = 4;
inline constexpr std::uint32_t reg_s = 5;
inline constexpr std::uint32_t first_constant_reg = 6;

struct HornerProgram {
    std::vector<Instruction> code;
    std::uint32_t result = reg_zero;

    std::size_t adds() const noexcept;
    std::size_t muls() const noexcept;
    std::size_t op_count() const noexcept
    {
        return code.size();
    }
    friend bool operator==(const HornerProgram &, const HornerProgram &) = default;
};

struct OpCounts {
    std::size_t adds = 0;
    std::size_t muls = 0;

    friend bool operator==(const OpCounts &, const OpCounts &) = default;
};

// Execution form of both programs of one sub-map. Each multiplication whose only use is an
// addition is folded into it, instructions are ordered by dependency depth, and the k-th
// instruction writes register temp_base + k. A fused instruction still rounds the product before
// adding, so results are bit-identical to running x_program and y_program.
struct ExecOp {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t addend;

    friend bool operator==(const ExecOp &, const ExecOp &) = default;
};

struct ExecProgram {
    std::vector<ExecOp> code;
    std::uint32_t temp_base = 0;
    std::uint32_t x_result = reg_x;
    std::uint32_t y_result = reg_y;
};

// A pruned sub-map in double precision; X and Y exclude the identity parts as in SubMapPoly.
struct CompiledSubMap {
    CsPoly<double> X;
    CsPoly<double> Y;
    HornerProgram x_program;
    HornerProgram y_program;
    ExecProgram exec;
};

struct CompiledMap {
    OrbitParams params;
    DerivedParams<double> derived;
    int N = 0;
    int M = 0;
    double h = 0;
    double T_max = 0;
    double y_max = 5;
    std::size_t terms_unpruned = 0;
    std::vector<CompiledSubMap> submaps;
    // Register image: reg_zero, reg_one, then x, y, c, s slots, then constants; temporaries follow.
    std::vector<double> registers;
    std::size_t temp_count = 0;

    std::size_t terms_pruned() const noexcept;
    OpCounts horner_ops() const noexcept;
    // Term-by-term cost: y^k, c^k, s^k take k - 1 multiplications each, plus one per factor joined
    // to the coefficient (none when the coefficient is exactly 1).
    OpCounts naive_ops() const noexcept;
    std::size_t register_count() const noexcept
    {
        return registers.size() + temp_count;
    }
};

// Drop every term with |coeff| * y_max^(d_y) < T_max. The affine x part is not stored in X and is
// therefore never pruned.
template <typename Real>
SubMapPoly<Real> prune(const SubMapPoly<Real> &sm, double T_max, double y_max);

template <typename Real>
CompiledMap compile(const SubMapSet<Real> &set, double T_max = 1e-18, double y_max = 5);

ExecProgram lower(const HornerProgram &x_program, const HornerProgram &y_program, std::uint32_t temp_base);

// Rebuild programs and registers from the pruned double polynomials of `cm`.
void rebuild_programs(CompiledMap &cm);

// Plain term-by-term evaluation of a compiled sub-map, for testing the programs.
double naive_sum(const CsPoly<double> &p, double y, double c, double s);

// Serialization. The text form starts with "HEMMAP 1"; the binary form with "HEMMAPB" and a
// version byte. Coefficients round-trip bit-exactly.
std::string serialize_text(const CompiledMap &cm);
std::string serialize_binary(const CompiledMap &cm);
// Detects the format from the magic. Throws format_error.
CompiledMap deserialize(const std::string &bytes);

void save_map(const CompiledMap &cm, const std::string &path, bool binary = false);
CompiledMap load_map(const std::string &path);

// FNV-1a over the text serialization.
std::uint64_t map_hash(const CompiledMap &cm);

} // namespace hem
