#pragma once

#include <stdexcept>
#include <string>

namespace slhvb {

enum class Err {
    DensityUnbounded,
    InfeasibleMoments,
    GridInfeasible,
    EmptyPool,
    UnavailableArm,
    WrongTotal,
    BadKPrime,
    ZeroPulls,
    PhaseExhausted,
    RewardMismatch,
    RankDeficient,
    ZeroBaseline,
    DegenerateVariance,
    TooFewRounds,
    NonPositiveLoss,
    NoCards,
    UnknownScenario,
    BadConfig,
};

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& what) { throw Error(code, what); }

} // namespace slhvb
