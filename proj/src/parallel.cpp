#include "mdmc/parallel.hpp"

namespace mdmc {

ExecMode& exec_mode() {
#ifdef _OPENMP
    static ExecMode mode = ExecMode::OpenMP;
#else
    static ExecMode mode = ExecMode::Serial;
#endif
    return mode;
}

}  // namespace mdmc
