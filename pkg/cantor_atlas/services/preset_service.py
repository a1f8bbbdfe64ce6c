import re
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from cantor_atlas.models import RationalMap, is_inf
from cantor_atlas.services.sphere_service import SphereService

QUARTIC = 'kameyama-quartic'
QUADRATIC = 'quadratic'
# accepted on input, never emitted
PRESET_ALIASES = {'quartic': QUARTIC}
PRESET_NAMES = (QUARTIC, QUADRATIC, *PRESET_ALIASES)

_LITERAL = re.compile(r'^[0-9eE.+\-i ]+$')


def parse_complex(text: str) -> complex:
    """Parse the 're+imi' literal ('0+3i', '1.665i', '-2', 'i')"""
    s = str(text).strip().replace(' ', '')
    if not s or not _LITERAL.match(s):
        raise ValueError(f"invalid complex literal: {text!r}")
    s = re.sub(r'(^|[+\-])i', r'\g<1>1i', s)
    try:
        return complex(s.replace('i', 'j'))
    except ValueError:
        raise ValueError(f"invalid complex literal: {text!r}")


def format_complex(z: complex) -> str:
    if is_inf(z):
        return 'inf'
    return f"{z.real:.12g}{z.imag:+.12g}i"


class MapSpec(BaseModel):
    """Where a map comes from: a named family with its parameter, or raw coefficients"""
    model_config = ConfigDict(frozen=True)

    preset: Optional[Literal['kameyama-quartic', 'quadratic']] = None
    a: Optional[str] = None
    c: Optional[str] = None
    num: Optional[List[str]] = None
    den: Optional[List[str]] = None

    @field_validator('preset', mode='before')
    @classmethod
    def canonical_preset(cls, value):
        return PRESET_ALIASES.get(value, value)

    @field_validator('a', 'c')
    @classmethod
    def check_literal(cls, value):
        if value is not None:
            parse_complex(value)
        return value

    @field_validator('num', 'den')
    @classmethod
    def check_coefficients(cls, value):
        if value is not None:
            for item in value:
                parse_complex(item)
        return value

    @model_validator(mode='after')
    def check_shape(self):
        if self.preset == QUARTIC:
            if self.a is None:
                raise ValueError("the quartic family needs the parameter a")
            if parse_complex(self.a) == 0:
                raise ValueError("the quartic family needs a != 0")
        elif self.preset == QUADRATIC:
            if self.c is None:
                raise ValueError("the quadratic family needs the parameter c")
        elif not (self.num and self.den):
            raise ValueError("give a preset or both numerator and denominator coefficients")
        return self

    def build(self) -> RationalMap:
        return PresetService.resolve(self)

    def to_dict(self):
        return self.model_dump(exclude_none=True)


class PresetService:
    """Named map families"""

    @staticmethod
    def quartic(a: complex) -> RationalMap:
        """f(z) = a(z^2 - 1) + 1 / (4a(z^2 - 1))"""
        a = complex(a)
        a2 = 4 * a * a
        return RationalMap(
            num=(a2 + 1, 0, -2 * a2, 0, a2),
            den=(-4 * a, 0, 4 * a),
            preset=QUARTIC,
            params=(('a', a),),
        )

    @staticmethod
    def quadratic(c: complex) -> RationalMap:
        """f(z) = z^2 + c"""
        c = complex(c)
        return RationalMap(num=(c, 0, 1), den=(1,), preset=QUADRATIC, params=(('c', c),))

    @staticmethod
    def resolve(spec: MapSpec) -> RationalMap:
        if spec.preset == QUARTIC:
            f = PresetService.quartic(parse_complex(spec.a))
        elif spec.preset == QUADRATIC:
            f = PresetService.quadratic(parse_complex(spec.c))
        else:
            f = RationalMap(
                num=tuple(parse_complex(x) for x in spec.num),
                den=tuple(parse_complex(x) for x in spec.den),
            )
        return SphereService.validate_map(f)

    @staticmethod
    def spec_for(f: RationalMap) -> MapSpec:
        if f.preset == QUARTIC:
            return MapSpec(preset=QUARTIC, a=format_complex(f.param('a')))
        if f.preset == QUADRATIC:
            return MapSpec(preset=QUADRATIC, c=format_complex(f.param('c')))
        return MapSpec(num=[format_complex(x) for x in f.num], den=[format_complex(x) for x in f.den])
