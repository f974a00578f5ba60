"""
Copyright (c) 2026 pkslab contributors
ALL RIGHTS RESERVED.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""


class PksLabError(Exception):
    """
    Base class of all errors raised by pkslab.
    """
    pass


class ConfigError(PksLabError):
    pass


class UnknownExperiment(PksLabError):
    pass


class SupportOverflow(PksLabError):
    """
    Too much mass close to the box boundary for a free-space computation.
    """

    def __init__(self, tail_fraction, threshold, where=""):
        self.tail_fraction = tail_fraction
        self.threshold = threshold
        super().__init__(
            "support overflow{}: tail mass fraction {:.3g} > {:.3g}".format(
                " in {}".format(where) if where else "",
                tail_fraction, threshold))


class CriticalAtom(PksLabError):
    """
    PKS atom with mass >= 8pi.
    """

    def __init__(self, position, mass):
        self.position = position
        self.mass = mass
        super().__init__(
            "atom at {} has mass {:.6g} >= 8pi".format(position, mass))


class NegativeMeasure(PksLabError):
    pass


class OutOfRange(PksLabError):
    pass


class NonConvergence(PksLabError):

    def __init__(self, msg, iterations=None, residual=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(msg)


class TailTruncation(PksLabError):
    pass


class NegativeDensity(PksLabError):
    pass


class MeanNotZero(PksLabError):
    pass


class DivisionUnderflow(PksLabError):
    pass


class UnresolvedGrid(PksLabError):
    pass


class EigenSolverError(PksLabError):
    pass


class IntegratorError(PksLabError):
    pass


class SolverAbort(PksLabError):
    """
    Base class for time stepper aborts. Keeps the partial trajectory.
    """

    def __init__(self, msg, trajectory=None):
        self.trajectory = trajectory
        super().__init__(msg)


class CFLCollapse(SolverAbort):
    pass


class NaNGuard(SolverAbort):

    def __init__(self, msg, trajectory=None, dump_path=None):
        self.dump_path = dump_path
        super().__init__(msg, trajectory)


class ConfinementFailure(SolverAbort):
    pass


class ReportError(PksLabError):
    """
    Report or trajectory files could not be written or read.
    """
    pass
