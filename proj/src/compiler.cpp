#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <hem/compiler.hpp>
#include <hem/error.hpp>

namespace hem
{

bool Instruction::is_add() const noexcept
{
    return addend != reg_zero;
}

std::size_t HornerProgram::adds() const noexcept
{
    return static_cast<std::size_t>(std::count_if(code.begin(), code.end(), [](const Instruction &i) { return i.is_add(); }));
}

std::size_t HornerProgram::muls() const noexcept
{
    return code.size() - adds();
}

std::size_t CompiledMap::terms_pruned() const noexcept
{
    std::size_t n = 0;
    for (const auto &sm : submaps) {
        const bool y_merged = sm.Y.contains(Monomial{1, 0, 0, 0});
        n += sm.X.size() + 1 + sm.Y.size() + (y_merged ? 0 : 1);
    }
    return n;
}

OpCounts CompiledMap::horner_ops() const noexcept
{
    OpCounts c;
    for (const auto &sm : submaps) {
        c.adds += sm.x_program.adds() + sm.y_program.adds();
        c.muls += sm.x_program.muls() + sm.y_program.muls();
    }
    return c;
}

namespace
{

void naive_poly_ops(const CsPoly<double> &p, OpCounts &c)
{
    // One addition per term joins it to the running sum, which starts at the identity part.
    c.adds += p.size();
    for (const auto &[m, v] : p) {
        int factors = 0;
        for (int e : {int(m.y), int(m.c), int(m.s)}) {
            if (e > 0) {
                c.muls += static_cast<std::size_t>(e - 1);
                ++factors;
            }
        }
        if (factors > 0) {
            c.muls += static_cast<std::size_t>(v == 1.0 ? factors - 1 : factors);
        }
    }
}

} // namespace

OpCounts CompiledMap::naive_ops() const noexcept
{
    OpCounts c;
    for (const auto &sm : submaps) {
        naive_poly_ops(sm.X, c);
        naive_poly_ops(sm.Y, c);
    }
    return c;
}

template <typename Real>
SubMapPoly<Real> prune(const SubMapPoly<Real> &sm, double T_max, double y_max)
{
    auto keep = [&](const Monomial &m, Real v) {
        Real b = abs(v);
        for (int i = 0; i < m.y; ++i) {
            b *= Real(y_max);
        }
        return !(b < Real(T_max));
    };
    SubMapPoly<Real> out;
    out.index = sm.index;
    for (const auto &[m, v] : sm.X) {
        if (keep(m, v)) {
            out.X.emplace_hint(out.X.end(), m, v);
        }
    }
    for (const auto &[m, v] : sm.Y) {
        if (keep(m, v)) {
            out.Y.emplace_hint(out.Y.end(), m, v);
        }
    }
    return out;
}

namespace
{

class Emitter
{
public:
    Emitter(const std::unordered_map<std::uint64_t, std::uint32_t> &constants, std::uint32_t temp_base)
        : m_constants(constants), m_next(temp_base)
    {
    }

    // Result register of x_or_y + p.
    HornerProgram emit(const CsPoly<double> &p, std::uint32_t identity)
    {
        m_code.clear();
        HornerProgram prog;
        if (p.empty()) {
            prog.result = identity;
            return prog;
        }
        std::vector<std::pair<Monomial, double>> terms(p.begin(), p.end());
        const auto r = level(terms, 0);
        prog.result = add(identity, r);
        prog.code = m_code;
        return prog;
    }

    std::uint32_t next_temp() const noexcept
    {
        return m_next;
    }

private:
    static int exponent(const Monomial &m, int lvl)
    {
        return lvl == 0 ? m.y : (lvl == 1 ? m.c : m.s);
    }

    static std::uint32_t variable(int lvl)
    {
        return lvl == 0 ? reg_y : (lvl == 1 ? reg_c : reg_s);
    }

    std::uint32_t constant(double v) const
    {
        return m_constants.at(std::bit_cast<std::uint64_t>(v));
    }

    std::uint32_t mul(std::uint32_t a, std::uint32_t b)
    {
        if (a == reg_one) {
            return b;
        }
        if (b == reg_one) {
            return a;
        }
        const auto d = m_next++;
        m_code.push_back({d, a, b, reg_zero});
        return d;
    }

    std::uint32_t add(std::uint32_t a, std::uint32_t b)
    {
        const auto d = m_next++;
        m_code.push_back({d, a, reg_one, b});
        return d;
    }

    // Horner in the variable of `lvl` (y, then c, then s), highest degree first.
    std::uint32_t level(std::span<const std::pair<Monomial, double>> terms, int lvl)
    {
        if (lvl == 3) {
            return constant(terms.front().second);
        }
        std::map<int, std::vector<std::pair<Monomial, double>>, std::greater<>> groups;
        for (const auto &t : terms) {
            groups[exponent(t.first, lvl)].push_back(t);
        }
        const auto v = variable(lvl);
        auto it = groups.begin();
        int cur = it->first;
        auto r = level(it->second, lvl + 1);
        for (++it; it != groups.end(); ++it) {
            for (int g = cur - it->first; g > 0; --g) {
                r = mul(r, v);
            }
            r = add(r, level(it->second, lvl + 1));
            cur = it->first;
        }
        for (int g = cur; g > 0; --g) {
            r = mul(r, v);
        }
        return r;
    }

    const std::unordered_map<std::uint64_t, std::uint32_t> &m_constants;
    std::uint32_t m_next;
    std::vector<Instruction> m_code;
};

} // namespace

ExecProgram lower(const HornerProgram &x_program, const HornerProgram &y_program, std::uint32_t temp_base)
{
    std::vector<Instruction> code = x_program.code;
    code.insert(code.end(), y_program.code.begin(), y_program.code.end());

    std::unordered_map<std::uint32_t, std::size_t> producer;
    std::unordered_map<std::uint32_t, int> uses;
    for (std::size_t k = 0; k < code.size(); ++k) {
        producer[code[k].dst] = k;
        for (auto r : {code[k].lhs, code[k].rhs, code[k].addend}) {
            ++uses[r];
        }
    }
    ++uses[x_program.result];
    ++uses[y_program.result];

    // Fold t = a * b; d = t * 1 + c into d = a * b + c when t has no other use.
    std::vector<bool> dead(code.size(), false);
    for (auto &in : code) {
        if (!in.is_add() || in.rhs != reg_one) {
            continue;
        }
        auto fold = [&](std::uint32_t t, std::uint32_t other) {
            const auto it = producer.find(t);
            if (it == producer.end() || uses[t] != 1 || code[it->second].is_add()) {
                return false;
            }
            const auto &m = code[it->second];
            dead[it->second] = true;
            in = {in.dst, m.lhs, m.rhs, other};
            return true;
        };
        if (!fold(in.lhs, in.addend)) {
            fold(in.addend, in.lhs);
        }
    }

    // Stable order by dependency depth so that independent chains interleave.
    std::unordered_map<std::uint32_t, int> depth;
    std::vector<std::pair<int, std::size_t>> order;
    for (std::size_t k = 0; k < code.size(); ++k) {
        if (dead[k]) {
            continue;
        }
        int d = 0;
        for (auto r : {code[k].lhs, code[k].rhs, code[k].addend}) {
            if (const auto it = depth.find(r); it != depth.end()) {
                d = std::max(d, it->second + 1);
            }
        }
        depth[code[k].dst] = d;
        order.emplace_back(d, k);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto &a, const auto &b) { return a.first < b.first; });

    ExecProgram ex;
    ex.temp_base = temp_base;
    ex.code.reserve(order.size());
    std::unordered_map<std::uint32_t, std::uint32_t> renamed;
    auto name = [&](std::uint32_t r) {
        const auto it = renamed.find(r);
        return it == renamed.end() ? r : it->second;
    };
    for (const auto &[d, k] : order) {
        const auto &in = code[k];
        ex.code.push_back({name(in.lhs), name(in.rhs), name(in.addend)});
        renamed[in.dst] = temp_base + static_cast<std::uint32_t>(ex.code.size() - 1);
    }
    ex.x_result = name(x_program.result);
    ex.y_result = name(y_program.result);
    return ex;
}

void rebuild_programs(CompiledMap &cm)
{
    cm.registers.assign(first_constant_reg, 0.0);
    cm.registers[reg_one] = 1.0;
    std::unordered_map<std::uint64_t, std::uint32_t> constants;
    constants[std::bit_cast<std::uint64_t>(1.0)] = reg_one;
    auto intern = [&](double v) {
        const auto key = std::bit_cast<std::uint64_t>(v);
        if (!constants.contains(key)) {
            constants[key] = static_cast<std::uint32_t>(cm.registers.size());
            cm.registers.push_back(v);
        }
    };
    for (const auto &sm : cm.submaps) {
        for (const auto &[m, v] : sm.X) {
            intern(v);
        }
        for (const auto &[m, v] : sm.Y) {
            intern(v);
        }
    }
    const auto base = static_cast<std::uint32_t>(cm.registers.size());
    std::size_t temps = 0;
    for (auto &sm : cm.submaps) {
        // X and Y temporaries of one sub-map never overlap, so both results survive until read.
        Emitter em(constants, base);
        sm.x_program = em.emit(sm.X, reg_x);
        sm.y_program = em.emit(sm.Y, reg_y);
        sm.exec = lower(sm.x_program, sm.y_program, base);
        temps = std::max<std::size_t>(temps, em.next_temp() - base);
    }
    cm.temp_count = temps;
}

double naive_sum(const CsPoly<double> &p, double y, double c, double s)
{
    double r = 0;
    for (const auto &[m, v] : p) {
        double t = v;
        for (int i = 0; i < m.y; ++i) {
            t *= y;
        }
        for (int i = 0; i < m.c; ++i) {
            t *= c;
        }
        for (int i = 0; i < m.s; ++i) {
            t *= s;
        }
        r += t;
    }
    return r;
}

template <typename Real>
CompiledMap compile(const SubMapSet<Real> &set, double T_max, double y_max)
{
    if (set.submaps.empty()) {
        throw domain_error("cannot compile an empty sub-map list");
    }
    if (set.eps_tracked) {
        throw domain_error("cannot compile a map with symbolic eps");
    }
    if (!(T_max >= 0) || !(y_max > 0)) {
        throw domain_error("pruning needs T_max >= 0 and y_max > 0");
    }
    CompiledMap cm;
    cm.params = set.params;
    cm.derived = derive_params<double>(set.params);
    cm.N = set.N;
    cm.M = set.M;
    cm.h = static_cast<double>(set.step());
    cm.T_max = T_max;
    cm.y_max = y_max;
    cm.terms_unpruned = set.term_count();
    for (const auto &sm : set.submaps) {
        const auto pruned = prune(sm, T_max, y_max);
        CompiledSubMap c;
        for (const auto &[m, v] : pruned.X) {
            if (const auto d = static_cast<double>(v); d != 0.0) {
                c.X.emplace_hint(c.X.end(), m, d);
            }
        }
        for (const auto &[m, v] : pruned.Y) {
            if (const auto d = static_cast<double>(v); d != 0.0) {
                c.Y.emplace_hint(c.Y.end(), m, d);
            }
        }
        cm.submaps.push_back(std::move(c));
    }
    rebuild_programs(cm);
    return cm;
}

// ---------------------------------------------------------------------------------------------
// Serialization

namespace
{

constexpr std::string_view text_magic = "HEMMAP";
constexpr std::string_view binary_magic = "HEMMAPB";
constexpr int format_version = 1;

std::string hex(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

[[noreturn]] void fail(format_error::kind k, const std::string &what)
{
    throw format_error(k, "map file: " + what);
}

double check_finite(double v, const std::string &what)
{
    if (!std::isfinite(v)) {
        fail(format_error::kind::non_finite, "non-finite value in " + what);
    }
    return v;
}

void finish(CompiledMap &cm)
{
    try {
        cm.derived = derive_params<double>(cm.params);
    } catch (const std::exception &e) {
        fail(format_error::kind::corrupt, std::string("invalid parameters: ") + e.what());
    }
    if (cm.N < 1 || cm.M < 1 || static_cast<int>(cm.submaps.size()) != cm.M) {
        fail(format_error::kind::corrupt, "inconsistent N/M header");
    }
    cm.h = 2 * M_PI / cm.M;
    rebuild_programs(cm);
}

class LineReader
{
public:
    explicit LineReader(const std::string &s) : m_in(s) {}

    std::string next(const char *what)
    {
        std::string line;
        if (!std::getline(m_in, line)) {
            fail(format_error::kind::truncated, std::string("stream ends before ") + what);
        }
        ++m_line;
        return line;
    }
    std::size_t line() const noexcept
    {
        return m_line;
    }

private:
    std::istringstream m_in;
    std::size_t m_line = 0;
};

double parse_double(const std::string &s, const std::string &what)
{
    errno = 0;
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        fail(format_error::kind::corrupt, "cannot parse " + what + " from '" + s + "'");
    }
    return check_finite(v, what);
}

long long parse_int(const std::string &s, const std::string &what)
{
    char *end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno != 0 || v < 0) {
        fail(format_error::kind::corrupt, "bad " + what + " '" + s + "'");
    }
    return v;
}

std::string expect_key(LineReader &in, const std::string &key)
{
    const auto line = in.next(key.c_str());
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.substr(0, eq) != key) {
        fail(format_error::kind::corrupt, "expected '" + key + "=' on line " + std::to_string(in.line()));
    }
    return line.substr(eq + 1);
}

void read_text_poly(LineReader &in, char tag, CsPoly<double> &out)
{
    const auto head = in.next("record count");
    if (head.size() < 3 || head[0] != tag || head[1] != ' ') {
        fail(format_error::kind::corrupt, std::string("expected '") + tag + " <count>' on line " + std::to_string(in.line()));
    }
    const auto count = parse_int(head.substr(2), "record count");
    for (long long r = 0; r < count; ++r) {
        const auto line = in.next("end of records");
        std::istringstream ls(line);
        int dy = -1;
        int dc = -1;
        int ds = -1;
        std::string coef;
        std::string extra;
        if (!(ls >> dy >> dc >> ds >> coef) || (ls >> extra) || dy < 0 || dc < 0 || ds < 0 || dy > 255 || dc > 255
            || ds > 255) {
            fail(format_error::kind::corrupt, "malformed record on line " + std::to_string(in.line()));
        }
        const Monomial m{std::uint8_t(dy), std::uint8_t(dc), std::uint8_t(ds), 0};
        if (!out.emplace(m, parse_double(coef, "coefficient")).second) {
            fail(format_error::kind::corrupt, "duplicate monomial on line " + std::to_string(in.line()));
        }
    }
}

CompiledMap deserialize_text(const std::string &bytes)
{
    LineReader in(bytes);
    const auto header = in.next("header");
    if (header.rfind(text_magic, 0) != 0) {
        fail(format_error::kind::bad_magic, "missing HEMMAP header");
    }
    if (header != std::string(text_magic) + " " + std::to_string(format_version)) {
        fail(format_error::kind::bad_version, "unsupported version header '" + header + "'");
    }
    CompiledMap cm;
    cm.params.e = parse_double(expect_key(in, "e"), "e");
    cm.params.eps = parse_double(expect_key(in, "eps"), "eps");
    cm.params.gamma = parse_double(expect_key(in, "gamma"), "gamma");
    cm.N = static_cast<int>(parse_int(expect_key(in, "N"), "N"));
    cm.M = static_cast<int>(parse_int(expect_key(in, "M"), "M"));
    cm.T_max = parse_double(expect_key(in, "T_max"), "T_max");
    cm.y_max = parse_double(expect_key(in, "y_max"), "y_max");
    cm.terms_unpruned = static_cast<std::size_t>(parse_int(expect_key(in, "terms_unpruned"), "terms_unpruned"));
    if (cm.M < 1 || cm.M > 100000) {
        fail(format_error::kind::corrupt, "M out of range");
    }
    for (int i = 1; i <= cm.M; ++i) {
        const auto line = in.next("sub-map header");
        if (line != "submap " + std::to_string(i)) {
            fail(format_error::kind::corrupt, "expected 'submap " + std::to_string(i) + "' on line " + std::to_string(in.line()));
        }
        CompiledSubMap sm;
        read_text_poly(in, 'X', sm.X);
        read_text_poly(in, 'Y', sm.Y);
        cm.submaps.push_back(std::move(sm));
    }
    if (in.next("end marker") != "end") {
        fail(format_error::kind::corrupt, "expected 'end' on line " + std::to_string(in.line()));
    }
    finish(cm);
    return cm;
}

void put_u32(std::string &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_u64(std::string &out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_f64(std::string &out, double v)
{
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader
{
public:
    explicit ByteReader(const std::string &s) : m_s(s) {}

    std::uint64_t u(int bytes, const char *what)
    {
        if (m_pos + static_cast<std::size_t>(bytes) > m_s.size()) {
            fail(format_error::kind::truncated, std::string("stream ends inside ") + what);
        }
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) {
            v |= std::uint64_t(static_cast<unsigned char>(m_s[m_pos++])) << (8 * i);
        }
        return v;
    }
    double f64(const char *what)
    {
        return check_finite(std::bit_cast<double>(u(8, what)), what);
    }
    std::size_t remaining() const noexcept
    {
        return m_s.size() - m_pos;
    }
    void skip(std::size_t n)
    {
        m_pos += n;
    }

private:
    const std::string &m_s;
    std::size_t m_pos = 0;
};

constexpr std::size_t binary_record_size = 3 + 8;

void read_binary_poly(ByteReader &in, CsPoly<double> &out)
{
    const auto count = in.u(4, "record count");
    if (count * binary_record_size > in.remaining()) {
        fail(format_error::kind::corrupt, "record count " + std::to_string(count) + " exceeds the remaining stream");
    }
    for (std::uint64_t r = 0; r < count; ++r) {
        const auto dy = static_cast<std::uint8_t>(in.u(1, "record"));
        const auto dc = static_cast<std::uint8_t>(in.u(1, "record"));
        const auto ds = static_cast<std::uint8_t>(in.u(1, "record"));
        const double v = in.f64("coefficient");
        if (!out.emplace(Monomial{dy, dc, ds, 0}, v).second) {
            fail(format_error::kind::corrupt, "duplicate monomial");
        }
    }
}

CompiledMap deserialize_binary(const std::string &bytes)
{
    ByteReader in(bytes);
    in.skip(binary_magic.size());
    const auto version = in.u(1, "version");
    if (version != format_version) {
        fail(format_error::kind::bad_version, "unsupported binary version " + std::to_string(version));
    }
    CompiledMap cm;
    cm.params.e = in.f64("e");
    cm.params.eps = in.f64("eps");
    cm.params.gamma = in.f64("gamma");
    cm.N = static_cast<int>(in.u(4, "N"));
    cm.M = static_cast<int>(in.u(4, "M"));
    cm.T_max = in.f64("T_max");
    cm.y_max = in.f64("y_max");
    cm.terms_unpruned = in.u(8, "terms_unpruned");
    if (cm.M < 1 || cm.M > 100000) {
        fail(format_error::kind::corrupt, "M out of range");
    }
    for (int i = 0; i < cm.M; ++i) {
        CompiledSubMap sm;
        read_binary_poly(in, sm.X);
        read_binary_poly(in, sm.Y);
        cm.submaps.push_back(std::move(sm));
    }
    if (in.remaining() != 0) {
        fail(format_error::kind::corrupt, "trailing bytes after the last sub-map");
    }
    finish(cm);
    return cm;
}

} // namespace

std::string serialize_text(const CompiledMap &cm)
{
    std::ostringstream out;
    out << text_magic << ' ' << format_version << '\n';
    out << "e=" << hex(cm.params.e) << '\n';
    out << "eps=" << hex(cm.params.eps) << '\n';
    out << "gamma=" << hex(cm.params.gamma) << '\n';
    out << "N=" << cm.N << '\n';
    out << "M=" << cm.M << '\n';
    out << "T_max=" << hex(cm.T_max) << '\n';
    out << "y_max=" << hex(cm.y_max) << '\n';
    out << "terms_unpruned=" << cm.terms_unpruned << '\n';
    for (std::size_t i = 0; i < cm.submaps.size(); ++i) {
        out << "submap " << i + 1 << '\n';
        for (const auto &[tag, poly] : {std::pair{'X', &cm.submaps[i].X}, std::pair{'Y', &cm.submaps[i].Y}}) {
            out << tag << ' ' << poly->size() << '\n';
            for (const auto &[m, v] : *poly) {
                out << int(m.y) << ' ' << int(m.c) << ' ' << int(m.s) << ' ' << hex(v) << '\n';
            }
        }
    }
    out << "end\n";
    return out.str();
}

std::string serialize_binary(const CompiledMap &cm)
{
    std::string out(binary_magic);
    out.push_back(static_cast<char>(format_version));
    put_f64(out, cm.params.e);
    put_f64(out, cm.params.eps);
    put_f64(out, cm.params.gamma);
    put_u32(out, static_cast<std::uint32_t>(cm.N));
    put_u32(out, static_cast<std::uint32_t>(cm.M));
    put_f64(out, cm.T_max);
    put_f64(out, cm.y_max);
    put_u64(out, cm.terms_unpruned);
    for (const auto &sm : cm.submaps) {
        for (const auto *poly : {&sm.X, &sm.Y}) {
            put_u32(out, static_cast<std::uint32_t>(poly->size()));
            for (const auto &[m, v] : *poly) {
                out.push_back(static_cast<char>(m.y));
                out.push_back(static_cast<char>(m.c));
                out.push_back(static_cast<char>(m.s));
                put_f64(out, v);
            }
        }
    }
    return out;
}

CompiledMap deserialize(const std::string &bytes)
{
    if (bytes.empty()) {
        fail(format_error::kind::empty, "empty input");
    }
    if (bytes.rfind(binary_magic, 0) == 0) {
        return deserialize_binary(bytes);
    }
    if (bytes.rfind(text_magic, 0) == 0) {
        return deserialize_text(bytes);
    }
    fail(format_error::kind::bad_magic, "unrecognized magic");
}

void save_map(const CompiledMap &cm, const std::string &path, bool binary)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot open " + path + " for writing");
    }
    const auto bytes = binary ? serialize_binary(cm) : serialize_text(cm);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw io_error("write to " + path + " failed");
    }
}

CompiledMap load_map(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

std::uint64_t map_hash(const CompiledMap &cm)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char ch : serialize_text(cm)) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

template SubMapPoly<double> prune(const SubMapPoly<double> &, double, double);
template SubMapPoly<quad> prune(const SubMapPoly<quad> &, double, double);
template CompiledMap compile(const SubMapSet<double> &, double, double);
template CompiledMap compile(const SubMapSet<quad> &, double, double);

} // namespace hem
