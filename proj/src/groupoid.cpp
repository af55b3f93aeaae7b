#include "ncorb/groupoid.hpp"

#include <sstream>

namespace ncorb {

const char* to_string(HaarConvention c) {
    return c == HaarConvention::Counting ? "counting" : "normalized";
}

ActionGroupoid::ActionGroupoid(GroupAction action, HaarConvention haar)
    : action_(std::move(action)), haar_(haar) {}

int ActionGroupoid::arrow_id(int g, int x) const {
    if (g < 0 || g >= group().order()) throw ContractError("group element out of range");
    if (x < 0 || x >= points()) throw ContractError("point out of range");
    return g * points() + x;
}

int ActionGroupoid::arrow_group(int a) const {
    if (a < 0 || a >= arrows()) throw ContractError("arrow out of range");
    return a / points();
}

int ActionGroupoid::arrow_point(int a) const {
    if (a < 0 || a >= arrows()) throw ContractError("arrow out of range");
    return a % points();
}

int ActionGroupoid::source(int a) const { return arrow_point(a); }

int ActionGroupoid::target(int a) const {
    return action_.apply(arrow_group(a), arrow_point(a));
}

std::optional<int> ActionGroupoid::compose(int a2, int a1) const {
    if (source(a2) != target(a1)) return std::nullopt;
    return arrow_id(group().multiply(arrow_group(a2), arrow_group(a1)), arrow_point(a1));
}

int ActionGroupoid::inverse(int a) const {
    return arrow_id(group().inverse(arrow_group(a)), target(a));
}

std::vector<int> ActionGroupoid::source_fiber(int x) const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(group().order()));
    for (int g = 0; g < group().order(); ++g) out.push_back(arrow_id(g, x));
    return out;
}

std::vector<int> ActionGroupoid::target_fiber(int x) const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(group().order()));
    for (int g = 0; g < group().order(); ++g)
        out.push_back(arrow_id(g, action_.apply(group().inverse(g), x)));
    return out;
}

double ActionGroupoid::weight() const {
    return haar_ == HaarConvention::Counting ? 1.0 : 1.0 / group().order();
}

int compose_arrows(const ActionGroupoid& gpd, int sigma, int tau) {
    auto out = gpd.compose(sigma, tau);
    if (!out) {
        std::ostringstream msg;
        msg << "arrows are not composable: (" << gpd.arrow_group(sigma) << ", "
            << gpd.arrow_point(sigma) << ") o (" << gpd.arrow_group(tau) << ", "
            << gpd.arrow_point(tau) << ") has source " << gpd.source(sigma)
            << " != target " << gpd.target(tau);
        throw ContractError(msg.str());
    }
    return *out;
}

}  // namespace ncorb
