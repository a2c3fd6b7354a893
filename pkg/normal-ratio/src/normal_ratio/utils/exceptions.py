#  Licensed to the Apache Software Foundation (ASF) under one or more
#  contributor license agreements.  See the NOTICE file distributed with
#  this work for additional information regarding copyright ownership.
#  The ASF licenses this file to You under the Apache License, Version 2.0
#  (the "License"); you may not use this file except in compliance with
#  the License.  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

class NormalRatioError(Exception):
    """
    Base class of every error raised by this package
    """


class InputError(NormalRatioError):
    """
    The caller supplied something unusable (exit code 2 on the command line)
    """


class NumericalError(NormalRatioError):
    """
    A computation could not produce a trustworthy number (exit code 3 on the command line)
    """


class DimensionMismatchError(InputError):
    """
    Vector or matrix dimensions do not agree
    """


class NonFiniteInputError(InputError):
    """
    NaN or infinity where a finite real is required
    """


class NotSymmetricError(InputError):
    """
    Matrix asymmetry exceeds the symmetrization tolerance
    """


class NotPositiveDefiniteError(InputError):
    """
    Cholesky factorization met a nonpositive pivot
    """


class ModelFileError(InputError):
    """
    Model file missing, malformed or describing an invalid model
    """


class WindowEmptyError(InputError):
    """
    No sample falls inside the histogram window
    """


class DegenerateCovarianceError(NumericalError):
    """
    Covariance of the linear combinations is not positive definite
    """


class NotConvergedError(NumericalError):
    """
    Adaptive quadrature exhausted its subdivision limit
    """


class MvnConsistencyError(NumericalError):
    """
    Orthant probability left [0, 1] by more than its error estimate
    """
