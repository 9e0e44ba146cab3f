"""Exception types shared by every module of the verifier."""


class HPLabError(Exception):
    """Base class; the CLI turns any of these into exit code 2."""


class DomainError(HPLabError):
    pass


class RegionError(HPLabError):
    def __init__(self, point, bound):
        super().__init__(f'point {point} outside region (bound {bound})')
        self.point = point
        self.bound = bound


class ContractViolation(HPLabError):
    pass


class SingularPointError(HPLabError):
    def __init__(self, point, divisor):
        super().__init__(f'point {point} lies on divisor {divisor}')
        self.point = point
        self.divisor = divisor


class ConsistencyError(HPLabError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class UnsupportedError(HPLabError):
    pass
