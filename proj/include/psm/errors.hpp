#pragma once

#include <stdexcept>
#include <string>

namespace psm {

/** Base class for every error raised by the library. */
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/** Shapes of matrices/vectors do not agree. */
class DimensionMismatch : public Error
{
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/** A parameter value lies outside the interval on which an object is defined. */
class OutOfRange : public Error
{
public:
    explicit OutOfRange(const std::string& what) : Error(what) {}
};

/** The basis matrix has a pivot below the singularity threshold. */
class SingularBasis : public Error
{
public:
    explicit SingularBasis(const std::string& what) : Error(what) {}
};

/** A column replacement would produce a (numerically) singular basis: |1 + p_k| too small. */
class UpdateDegenerate : public Error
{
public:
    explicit UpdateDegenerate(const std::string& what) : Error(what) {}
};

/** The starting dictionary is not optimal for any value of the parameter. */
class InfeasibleAtLargeLambda : public Error
{
public:
    explicit InfeasibleAtLargeLambda(const std::string& what) : Error(what) {}
};

/** No leaving variable exists for a primal pivot: the program is unbounded below the breakpoint. */
class UnboundedDirection : public Error
{
public:
    explicit UnboundedDirection(const std::string& what) : Error(what) {}
};

/** No entering variable exists for a dual pivot: the program is infeasible below the breakpoint. */
class InfeasibleProblem : public Error
{
public:
    explicit InfeasibleProblem(const std::string& what) : Error(what) {}
};

/** The brute-force oracle refuses instances beyond its enumeration limits. */
class SizeGuard : public Error
{
public:
    explicit SizeGuard(const std::string& what) : Error(what) {}
};

/** A positive/negative split has both halves nonzero at a breakpoint. */
class ComplementarityViolation : public Error
{
public:
    explicit ComplementarityViolation(const std::string& what) : Error(what) {}
};

/** Malformed input file. */
class ParseError : public Error
{
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace psm
