#pragma once

#include <ostream>

#include <hem/error.hpp>

namespace hem::cli
{

template <typename F>
int guarded(F &&f, std::ostream &err)
{
    try {
        return f();
    } catch (const format_error &e) {
        err << "error: bad map file: " << e.what() << '\n';
        return usage;
    } catch (const degenerate_error &e) {
        err << "error: degenerate parameters: " << e.what() << '\n';
        return usage;
    } catch (const domain_error &e) {
        err << "error: invalid parameter: " << e.what() << '\n';
        return usage;
    } catch (const resource_error &e) {
        err << "error: resource limit: " << e.what() << '\n';
        return resource;
    } catch (const step_failure &e) {
        err << "error: reference integrator: " << e.what() << '\n';
        return resource;
    } catch (const fit_error &e) {
        err << "error: fit: " << e.what() << '\n';
        return resource;
    } catch (const overflow_error &e) {
        err << "error: overflow: " << e.what() << '\n';
        return resource;
    } catch (const io_error &e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
}

} // namespace hem::cli
