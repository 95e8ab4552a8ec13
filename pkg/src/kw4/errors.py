"""Exception hierarchy for the kw4 engine."""


class KW4Error(Exception):
    """Base class for every error raised by kw4."""


class SingularValue(KW4Error, ZeroDivisionError):
    pass


class SingularMetric(KW4Error, ArithmeticError):
    pass


class SingularTransform(KW4Error, ArithmeticError):
    pass


class DegenerateProjection(KW4Error, ValueError):
    """The compatible part of a raw metric is degenerate."""


class UnsupportedSignature(KW4Error, ValueError):
    pass


class InvalidStructure(KW4Error, ValueError):
    pass


class InvalidModel(KW4Error, ValueError):
    pass


class DegreeOverflow(KW4Error, ValueError):
    pass


class OrderExhausted(KW4Error, ValueError):
    """An operation needs partial derivatives that an order-0 object does not carry."""


class OrderMismatch(KW4Error, ValueError):
    pass
