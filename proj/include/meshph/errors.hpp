#ifndef MESHPH_ERRORS_HPP
#define MESHPH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace meshph {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define MESHPH_DEFINE_ERROR(Name)                                              \
    struct Name : Error {                                                      \
        using Error::Error;                                                    \
    }

// complex
MESHPH_DEFINE_ERROR(DimensionMismatch);
MESHPH_DEFINE_ERROR(ChainViolation);
MESHPH_DEFINE_ERROR(BadReference);
MESHPH_DEFINE_ERROR(DegenerateCell);
MESHPH_DEFINE_ERROR(NotAPermutation);

// mesher
MESHPH_DEFINE_ERROR(BadDimension);
MESHPH_DEFINE_ERROR(MeshingFailure);
MESHPH_DEFINE_ERROR(DegenerateTriangle);

// phcore / stepper
MESHPH_DEFINE_ERROR(NonPositiveMass);
MESHPH_DEFINE_ERROR(NonFiniteState);

// learn
MESHPH_DEFINE_ERROR(ShapeMismatch);
MESHPH_DEFINE_ERROR(NonFiniteGradient);
MESHPH_DEFINE_ERROR(Diverged);
MESHPH_DEFINE_ERROR(CheckpointMismatch);

// wavegen
MESHPH_DEFINE_ERROR(NonCommensurate);

// physlab
MESHPH_DEFINE_ERROR(TooShort);
MESHPH_DEFINE_ERROR(ZeroModeAmplitude);
MESHPH_DEFINE_ERROR(ZeroEnergy);
MESHPH_DEFINE_ERROR(ZeroField);
MESHPH_DEFINE_ERROR(SingularFit);
MESHPH_DEFINE_ERROR(UnknownVariant);

// cli
MESHPH_DEFINE_ERROR(ConfigError);

#undef MESHPH_DEFINE_ERROR

} // namespace meshph

#endif
