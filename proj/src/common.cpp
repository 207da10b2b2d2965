#include "chaotherm/error.hpp"
#include "chaotherm/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace chaotherm {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::empty_spectrum: return "empty-spectrum";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::range: return "range";
        case ErrorKind::ordering: return "ordering";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::degenerate_input: return "degenerate-input";
        case ErrorKind::shape: return "shape";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CHAOTHERM_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

}  // namespace chaotherm
