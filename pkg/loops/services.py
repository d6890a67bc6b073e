"""
Update application on formulas and expressions.
"""
from typing import Union, overload

from expr.models import Formula, PolyExp

from .models import Update


@overload
def apply_update(target: Formula, update: Update, k: int = 1) -> Formula: ...


@overload
def apply_update(target: PolyExp, update: Update, k: int = 1) -> PolyExp: ...


def apply_update(target: Union[Formula, PolyExp], update: Update, k: int = 1):
    """
    Replace every program variable by its k-fold updated expression.

    Args:
        target: Formula or expression over the program variables
        update: The loop's update
        k: Number of update applications

    Returns:
        The same kind of object as target
    """
    if k == 0:
        return target
    return target.substitute(update.power(k))
