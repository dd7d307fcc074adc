#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hem
{

// Invalid parameter (eccentricity outside [0, 1), negative rates, ...).
class domain_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// A configured size limit was exceeded (term cap during series generation).
class resource_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A closed-form expression hit a (near-)resonant denominator.
class degenerate_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// A file could not be opened, read or written.
class io_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class step_failure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class fit_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// The compiled map was driven outside its guard band.
class overflow_error : public std::overflow_error
{
public:
    overflow_error(const std::string &what, std::uint64_t iteration)
        : std::overflow_error(what + " (iteration " + std::to_string(iteration) + ")"), m_iteration(iteration)
    {
    }

    std::uint64_t iteration() const noexcept
    {
        return m_iteration;
    }

private:
    std::uint64_t m_iteration;
};

class format_error : public std::runtime_error
{
public:
    enum class kind { empty, bad_magic, bad_version, truncated, corrupt, non_finite };

    format_error(kind k, const std::string &what) : std::runtime_error(what), m_kind(k) {}

    kind code() const noexcept
    {
        return m_kind;
    }

private:
    kind m_kind;
};

} // namespace hem
