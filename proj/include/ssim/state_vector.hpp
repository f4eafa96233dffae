#ifndef SSIM_STATE_VECTOR_HPP
#define SSIM_STATE_VECTOR_HPP

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "ssim/error.hpp"

namespace ssim {

/// One slot of a flattened state: what it is and its units.
struct StateSlot {
    std::string name;
    std::string units;
};

/// Names every slot of a flattened state vector, in order.
using StateLayout = std::vector<StateSlot>;

/**
 * Flat scalar state with a layout describing each slot.
 *
 * The layout is shared (typically a static per-subsystem constant) and
 * must match the value count; integrators use it to name the offending
 * slot in error messages.
 */
struct StateVector {
    Eigen::VectorXd values;
    std::shared_ptr<const StateLayout> layout;

    StateVector() = default;
    StateVector(Eigen::VectorXd v, std::shared_ptr<const StateLayout> l)
        : values(std::move(v)), layout(std::move(l)) {
        if (layout && static_cast<Eigen::Index>(layout->size()) != values.size())
            throw RuntimeError("StateVector: layout length " +
                               std::to_string(layout->size()) +
                               " != value count " + std::to_string(values.size()));
    }

    Eigen::Index size() const { return values.size(); }

    const std::string& slot_name(Eigen::Index i) const {
        static const std::string unnamed = "<unnamed>";
        if (!layout || i < 0 || i >= static_cast<Eigen::Index>(layout->size()))
            return unnamed;
        return (*layout)[static_cast<std::size_t>(i)].name;
    }
};

/// Build a shared layout from {name, units} pairs.
inline std::shared_ptr<const StateLayout> make_layout(
    std::initializer_list<StateSlot> slots) {
    return std::make_shared<const StateLayout>(slots);
}

}  // namespace ssim

#endif  // SSIM_STATE_VECTOR_HPP
