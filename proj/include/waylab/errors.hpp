#pragma once

#include <stdexcept>
#include <string>

namespace waylab {

/// Input violated a documented precondition or file-format invariant.
/// The CLI maps these to exit code 3.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_target_error : validation_error {
    explicit degenerate_target_error(const std::string& what) : validation_error(what) {}
};

struct empty_trajectory_error : validation_error {
    explicit empty_trajectory_error(const std::string& what) : validation_error(what) {}
};

struct invalid_params_error : validation_error {
    explicit invalid_params_error(const std::string& what) : validation_error(what) {}
};

struct not_running_error : validation_error {
    explicit not_running_error(const std::string& what) : validation_error(what) {}
};

struct shape_mismatch_error : validation_error {
    explicit shape_mismatch_error(const std::string& what) : validation_error(what) {}
};

struct empty_batch_error : validation_error {
    explicit empty_batch_error(const std::string& what) : validation_error(what) {}
};

struct world_path_mismatch_error : validation_error {
    explicit world_path_mismatch_error(const std::string& what) : validation_error(what) {}
};

struct missing_checkpoint_error : validation_error {
    explicit missing_checkpoint_error(const std::string& what) : validation_error(what) {}
};

struct empty_traces_error : validation_error {
    explicit empty_traces_error(const std::string& what) : validation_error(what) {}
};

}  // namespace waylab
