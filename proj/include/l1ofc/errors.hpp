#pragma once

#include <stdexcept>
#include <string>

namespace l1ofc {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define L1OFC_ERROR(NAME)                                              \
    struct NAME : Error {                                              \
        explicit NAME(const std::string& msg = #NAME) : Error(msg) {}  \
    }

// matlib
L1OFC_ERROR(NotHurwitz);
L1OFC_ERROR(SingularSolve);
L1OFC_ERROR(NotPositiveDefinite);
L1OFC_ERROR(RankDeficient);
L1OFC_ERROR(NoConvergence);
L1OFC_ERROR(NotDetectable);

// lti
L1OFC_ERROR(DimensionMismatch);
L1OFC_ERROR(AlgebraicLoop);
L1OFC_ERROR(Unstable);
L1OFC_ERROR(NoDecay);
L1OFC_ERROR(NotMinimal);
L1OFC_ERROR(RankAmbiguous);
L1OFC_ERROR(NonFiniteState);

// interactor
L1OFC_ERROR(UnstablePoleRequested);
L1OFC_ERROR(SingularCoupling);
L1OFC_ERROR(InteractorMismatch);
L1OFC_ERROR(DegenerateInteractor);

// design
L1OFC_ERROR(Infeasible);
L1OFC_ERROR(AlphaTooSmall);
L1OFC_ERROR(GammaTooSmall);
L1OFC_ERROR(ImproperRealization);

// harness
L1OFC_ERROR(MassMatrixSingular);
L1OFC_ERROR(DesignInfeasible);
L1OFC_ERROR(NoInstabilityFound);
L1OFC_ERROR(ConfigError);

#undef L1OFC_ERROR

}  // namespace l1ofc
