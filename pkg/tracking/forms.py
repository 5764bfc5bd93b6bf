import itertools
import math
import re

import numpy as np
from django import forms
from django.conf import settings

from .metrics import NORMS
from .problems import PROBLEMS

_PI = re.compile(r'([+-]?)(\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?')
_LINSPACE = re.compile(r'linspace\((.+),(.+),(.+)\)')

# config names of the analytic demos, which have no training run
DEMO_PROBLEMS = {'demo-gaussian': ('staircase', 'aligned-gaussian')}


def parse_number(text: str) -> float:
    """Float literal or a multiple/fraction of pi such as `-pi/10` or `2*pi/5`."""
    text = text.strip().lower()
    match = _PI.fullmatch(text)
    if match:
        sign, factor, denominator = match.groups()
        value = float(factor or 1.0) * math.pi / float(denominator or 1.0)
        return -value if sign == '-' else value
    try:
        return float(text)
    except ValueError:
        raise forms.ValidationError(f'not a number: {text!r}') from None


def parse_grid(text: str) -> list[float]:
    """A float, a comma list, or `linspace(lo, hi, n)`."""
    text = text.strip()
    match = _LINSPACE.fullmatch(text.replace(' ', ''))
    if match:
        lo, hi, count = match.groups()
        try:
            n = int(count)
        except ValueError:
            raise forms.ValidationError(f'linspace count must be an integer, got {count!r}') from None
        if n < 1:
            raise forms.ValidationError('linspace needs at least one point')
        return np.linspace(parse_number(lo), parse_number(hi), n).tolist()
    values = [item for item in text.split(',') if item.strip()]
    if not values:
        raise forms.ValidationError('empty parameter grid')
    return [parse_number(item) for item in values]


class AutoFloatField(forms.CharField):
    """A non-negative float or the word `auto` (cleaned to None)."""

    def clean(self, value):
        value = super().clean(value)
        if value in (None, ''):
            return ''
        if value.strip().lower() == 'auto':
            return None
        number = parse_number(value)
        if number < 0:
            raise forms.ValidationError('must be non-negative or auto')
        return number


class RunConfigForm(forms.Form):
    problem = forms.ChoiceField(choices=[(name, name) for name in [*PROBLEMS, *DEMO_PROBLEMS]])
    output_dir = forms.CharField(required=False)
    workers = forms.IntegerField(required=False, min_value=1)
    norm = forms.ChoiceField(required=False, choices=[(n, n) for n in NORMS])
    align = forms.BooleanField(required=False)

    nx = forms.IntegerField(required=False, min_value=1)
    ny = forms.IntegerField(required=False, min_value=1)
    degree = forms.IntegerField(required=False, min_value=0, max_value=8)
    geom_degree = forms.IntegerField(required=False, min_value=1, max_value=4)

    kappa = AutoFloatField(required=False)
    lm_lambda = AutoFloatField(required=False)
    eps1 = forms.FloatField(required=False)
    eps2 = forms.FloatField(required=False)
    max_iterations = forms.IntegerField(required=False, min_value=0)
    newton_tol = forms.FloatField(required=False)
    newton_max_iterations = forms.IntegerField(required=False, min_value=1)
    energy = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    n_basis = forms.IntegerField(required=False, min_value=1)
    n_mapping = forms.IntegerField(required=False, min_value=0)

    def __init__(self, *args, grids=None, **kwargs):
        super().__init__(*args, **kwargs)
        self.grids = grids or {}
        self.fields['workers'].initial = settings.IFTROM_WORKERS

    def clean_problem(self):
        name = self.cleaned_data['problem']
        if name in DEMO_PROBLEMS:
            demos = ', '.join(DEMO_PROBLEMS[name])
            raise forms.ValidationError(f'{name} is not trained from a run file; use the demo command ({demos})')
        return name

    def _clean_positive(self, name):
        value = self.cleaned_data.get(name)
        if value is not None and not value > 0:
            self.add_error(name, 'must be positive')

    def clean(self):
        cleaned = super().clean()
        for name in ('eps1', 'eps2', 'newton_tol'):
            self._clean_positive(name)
        name = cleaned.get('problem')
        if not name:
            return cleaned
        problem = PROBLEMS[name]()
        if problem.law().dim == 2 and cleaned.get('nx') and not cleaned.get('ny'):
            cleaned['ny'] = cleaned['nx']
        for section in ('training', 'test'):
            cleaned[section] = self._clean_grid(problem, section)
        cleaned['problem_instance'] = problem
        return cleaned

    def _clean_grid(self, problem, section):
        grid = self.grids.get(section)
        if not grid:
            return []
        names = problem.parameter_names
        unknown = set(grid) - set(names)
        missing = set(names) - set(grid)
        if unknown or missing:
            self.add_error(
                None, f'[{section}] needs exactly the keys {", ".join(names)}'
                + (f'; unknown {sorted(unknown)}' if unknown else '')
                + (f'; missing {sorted(missing)}' if missing else ''),
            )
            return []
        try:
            axes = [parse_grid(grid[n]) for n in names]
        except forms.ValidationError as exc:
            self.add_error(None, f'[{section}] {exc.messages[0]}')
            return []
        points = [np.array(p) for p in itertools.product(*axes)]
        for mu in points:
            try:
                problem.check_parameter(mu)
            except ValueError as exc:
                self.add_error(None, f'[{section}] {exc}')
                return []
        return points
