"""
Scenario documents: a JSON file describing one experiment (hypothesis class,
true model, environment, horizon, estimator), validated with pydantic and
turned into the objects a run needs.
"""

import json
import logging
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from .belief_utils import Fattened, FullSimplex, Halfspace, LinearConstraints, Singleton, VertexSet
from .dec_utils import Model, ModelClass, RewardFn
from .e2d_utils import BanditProblem
from .env_utils import ConsistencyMonitor, EnvStrategy, RobustEnvironment, check_consistency
from .error_utils import InfeasibleBeliefError, RobustDecError, ScenarioValidationError
from .estimator_utils import (CoveringEstimator, RobustUniversalEstimator, fatten_model, covering_bound,
                              rue_bounds)
from .linbandit_utils import BilinearSpec, HypothesisBox, cover_models, model_from_point
from .numpy_utils import make_rng
from .prob_utils import Dist, OutcomeSpace
from .rmdp_market_utils import RmdpMarketEstimator, RmdpProblem, rmdp_reference_bound, rmdp_market_bounds
from .rmdp_utils import (ParhalfHypothesis, Policy, RMDPKernel, RmdpEnvironment, cell_keys, cell_space,
                         certify_one_bounded, enumerate_deterministic_policies, parhalf_to_kernel)

__all__ = ['KINDS', 'DEFAULT_ESTIMATORS', 'DEFAULT_ENV_MODES', 'BeliefSpec', 'Scenario', 'parse_scenario',
           'parse_belief', 'load_scenario', 'build_belief', 'ScenarioRuntime', 'build_runtime', 'validate_scenario']

logger = logging.getLogger(__name__)

KINDS = ('robust-bandit', 'linear-bandit', 'rmdp')
DEFAULT_ESTIMATORS = {'robust-bandit': 'rue', 'linear-bandit': 'covering', 'rmdp': 'rmdp-market'}
DEFAULT_ENV_MODES = {'robust-bandit': 'worst-case-stationary', 'linear-bandit': 'worst-case-stationary',
                     'rmdp': 'worst-case'}
TRUE_POINT_LABEL = 'truth'


class _Spec(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class VertexSetSpec(_Spec):
    backend: Literal['vertex-set']
    points: List[List[float]] = Field(min_length=1)


class ConstraintSpec(_Spec):
    coeff: List[float]
    lower: float


class LinearSpec(_Spec):
    backend: Literal['linear']
    constraints: List[ConstraintSpec] = []


class HalfspaceSpec(_Spec):
    backend: Literal['halfspace']
    g: List[float]
    c: float


class SingletonSpec(_Spec):
    backend: Literal['singleton']
    point: List[float]


class FullSpec(_Spec):
    backend: Literal['full']


class FattenedSpec(_Spec):
    backend: Literal['fattened']
    base: 'BeliefSpec'
    radius: float = Field(ge=0.0, le=1.0)


BeliefSpec = Annotated[Union[VertexSetSpec, LinearSpec, HalfspaceSpec, SingletonSpec, FullSpec, FattenedSpec],
                       Field(discriminator='backend')]
FattenedSpec.model_rebuild()


class ModelSpec(_Spec):
    label: str
    arms: List[BeliefSpec] = Field(min_length=1)


class EnvironmentSpec(_Spec):
    mode: Optional[str] = None
    scope: Literal['actions-only', 'plus-public-estimates'] = 'actions-only'
    model: Optional[str] = None
    script: List[List[List[float]]] = []


class EstimatorSpec(_Spec):
    name: Optional[Literal['rue', 'covering', 'rmdp-market']] = None
    eps_prime: float = Field(0.001, gt=0.0, le=0.01)


class LinearBanditSpec(_Spec):
    coeff: List[List[List[List[float]]]]
    offset: Optional[List[List[List[float]]]] = None
    lower: List[float] = Field(min_length=1)
    upper: List[float] = Field(min_length=1)
    cover_eps: float = Field(gt=0.0)
    radius: float = Field(ge=0.0, le=1.0)
    true_point: List[float] = Field(min_length=1)


class ParhalfSpec(_Spec):
    rec: List[List[int]]
    f: List[List[List[float]]]
    c: List[List[float]]


class CellSpec(_Spec):
    h: int = Field(ge=0)
    s: int = Field(ge=0)
    a: int = Field(ge=0)
    belief: BeliefSpec


class KernelSpec(_Spec):
    label: str
    parhalf: Optional[ParhalfSpec] = None
    cells: Optional[List[CellSpec]] = None
    certified_one_bounded: bool = False

    @model_validator(mode='after')
    def _one_description(self):
        if (self.parhalf is None) == (self.cells is None):
            raise ValueError('give exactly one of parhalf or cells')
        return self


class RmdpSpec(_Spec):
    S: int = Field(ge=1)
    A: int = Field(ge=1)
    H: int = Field(ge=1)
    hypotheses: List[KernelSpec] = Field(min_length=1)
    true: str
    eps_S: float = Field(gt=0.0, le=1.0)
    eps_01: float = Field(gt=0.0, le=1.0)
    policies: Optional[List[List[List[int]]]] = None


class Scenario(_Spec):
    """
    One experiment.

    Bandit kinds carry reward, models and true_models; 'linear-bandit' carries a
    linear block and 'rmdp' an rmdp block instead of explicit models.
    """

    name: str = Field(min_length=1)
    kind: Literal['robust-bandit', 'linear-bandit', 'rmdp']
    T: int = Field(ge=0)
    delta: float = Field(gt=0.0, lt=1.0)
    seeds: int = Field(1, ge=1)
    seed_base: int = Field(0, ge=0)
    outcomes: Optional[List[str]] = None
    reward: Optional[List[List[float]]] = None
    models: List[ModelSpec] = []
    true_models: List[str] = []
    environment: EnvironmentSpec = EnvironmentSpec()
    estimator: EstimatorSpec = EstimatorSpec()
    linear: Optional[LinearBanditSpec] = None
    rmdp: Optional[RmdpSpec] = None
    beta_budget: Optional[float] = Field(None, gt=0.0)

    @model_validator(mode='after')
    def _check_kind(self):
        if self.kind != 'rmdp' and self.reward is None:
            raise ValueError("kind '{}' needs a reward table".format(self.kind))
        if self.kind == 'robust-bandit':
            if not self.models:
                raise ValueError("kind 'robust-bandit' needs models")
            labels = [m.label for m in self.models]
            if len(set(labels)) != len(labels):
                raise ValueError('model labels are not distinct: {}'.format(labels))
            missing = [x for x in self.true_models if x not in labels]
            if not self.true_models or missing:
                raise ValueError('true_models must name declared models; unresolved {}'.format(missing))
            if self.environment.model is not None and self.environment.model not in self.true_models:
                raise ValueError('environment model {!r} is not among true_models'.format(self.environment.model))
        if self.kind == 'linear-bandit' and self.linear is None:
            raise ValueError("kind 'linear-bandit' needs a linear block")
        if self.kind == 'rmdp':
            if self.rmdp is None:
                raise ValueError("kind 'rmdp' needs an rmdp block")
            labels = [k.label for k in self.rmdp.hypotheses]
            if len(set(labels)) != len(labels):
                raise ValueError('hypothesis labels are not distinct: {}'.format(labels))
            if self.rmdp.true not in labels:
                raise ValueError('true hypothesis {!r} is not declared'.format(self.rmdp.true))
        if self.estimator_name != DEFAULT_ESTIMATORS[self.kind]:
            raise ValueError("estimator {!r} does not drive kind '{}'".format(self.estimator_name, self.kind))
        return self

    @property
    def estimator_name(self):
        return self.estimator.name or DEFAULT_ESTIMATORS[self.kind]

    @property
    def env_mode(self):
        return self.environment.mode or DEFAULT_ENV_MODES[self.kind]


def _field_errors(err):
    return [('.'.join(str(x) for x in e['loc']) or '<document>', e['msg']) for e in err.errors()]


def parse_scenario(payload):
    """
    Validate a decoded scenario document.

    Inputs:
        payload - Dict (decoded JSON).
    Outputs:
        scenario - Scenario.
    Raises ScenarioValidationError listing every offending field.
    """

    try:
        return Scenario.model_validate(payload)
    except ValidationError as err:
        raise ScenarioValidationError(_field_errors(err)) from None


def parse_belief(payload):
    """Validate a single belief spec (a dict with a 'backend' key)."""
    try:
        return TypeAdapter(BeliefSpec).validate_python(payload)
    except ValidationError as err:
        raise ScenarioValidationError(_field_errors(err)) from None


def load_scenario(path):
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as err:
        raise ScenarioValidationError([('<document>', 'not valid JSON: {}'.format(err))]) from None
    return parse_scenario(payload)


def build_belief(spec, space):
    """ImpreciseBelief on space from a belief spec."""
    if spec.backend == 'vertex-set':
        return VertexSet(space, spec.points)
    if spec.backend == 'linear':
        return LinearConstraints(space, [(c.coeff, c.lower) for c in spec.constraints])
    if spec.backend == 'halfspace':
        return Halfspace(space, spec.g, spec.c)
    if spec.backend == 'singleton':
        return Singleton(space, spec.point)
    if spec.backend == 'full':
        return FullSimplex(space)
    return Fattened(build_belief(spec.base, space), spec.radius)


def _outcome_space(scenario):
    n = len(scenario.reward[0]) if scenario.reward else 0
    if scenario.outcomes is not None:
        return OutcomeSpace(tuple(scenario.outcomes))
    return OutcomeSpace.of_size(n)


def _policies(spec):
    if spec.policies is None:
        return enumerate_deterministic_policies(spec.S, spec.A, spec.H)
    return [Policy.deterministic(np.asarray(actions, dtype=int), spec.A) for actions in spec.policies]


def _kernel(spec, H, S, A):
    if spec.parhalf is not None:
        P = ParhalfHypothesis(H, S, A, spec.parhalf.rec, spec.parhalf.f, spec.parhalf.c)
        return parhalf_to_kernel(P)
    cells = {key: FullSimplex(cell_space(H, S, key[0])) for key in cell_keys(H, S, A)}
    for cell in spec.cells:
        key = (cell.h, cell.s, cell.a)
        cells[key] = build_belief(cell.belief, cell_space(H, S, cell.h))
    return RMDPKernel(H, S, A, cells, certified_one_bounded=spec.certified_one_bounded)


class ScenarioRuntime:
    """
    Objects shared by every seed of a scenario, plus per-seed factories for the
    stateful ones (estimator and environment).

    Inputs:
        scenario - Scenario.
    """

    def __init__(self, scenario):
        self.scenario = scenario
        self.kind = scenario.kind
        self.T, self.delta = scenario.T, scenario.delta
        self.extras = {}
        if self.kind == 'rmdp':
            self._build_rmdp()
        else:
            self._build_bandit()
        self.beta_budget = scenario.beta_budget if scenario.beta_budget is not None else self.beta_bound
        if self.kind == 'rmdp':
            spec = scenario.rmdp
            eps = float(np.sqrt(self.beta_budget / self.T)) if self.T > 0 else None
            self.extras['rmdp_reference_bound'] = rmdp_reference_bound(spec.H, spec.S, spec.A, eps) \
                if eps is not None else None

    def _build_bandit(self):
        scenario = self.scenario
        space = _outcome_space(scenario)
        self.r = RewardFn(scenario.reward, space)
        if self.kind == 'robust-bandit':
            self.H = ModelClass(Model(m.label, [build_belief(b, space) for b in m.arms]) for m in scenario.models)
            self.true_labels = list(scenario.true_models)
            self.env_model = self.H.get(scenario.environment.model or self.true_labels[0])
            self.beta_bound, self.alpha_bound = rue_bounds(len(self.H), self.T, self.delta)
        else:
            lin = scenario.linear
            spec = BilinearSpec(space, lin.coeff, lin.offset)
            box = HypothesisBox(lin.lower, lin.upper)
            self.cover, self.cover_points = cover_models(spec, box, lin.cover_eps)
            self.env_model = model_from_point(spec, lin.true_point, label=TRUE_POINT_LABEL)
            self.H = ModelClass([fatten_model(M, lin.radius) for M in self.cover] + [self.env_model])
            self.true_labels = [TRUE_POINT_LABEL]
            self.beta_bound = covering_bound(len(self.cover), self.T, self.delta, lin.radius)
            self.alpha_bound = rue_bounds(len(self.cover), self.T, self.delta)[1]
            self.extras['cover_size'] = len(self.cover)
        if self.r.n_actions != self.H.n_actions:
            raise ScenarioValidationError([('reward', '{} reward rows for {} actions'.format(
                self.r.n_actions, self.H.n_actions))])
        self.problem = BanditProblem(self.H, self.r)

    def _build_rmdp(self):
        spec = self.scenario.rmdp
        self.policies = _policies(spec)
        self.kernels = [(k.label, _kernel(k, spec.H, spec.S, spec.A)) for k in spec.hypotheses]
        self.true_labels = [spec.true]
        self.true_kernel = dict(self.kernels)[spec.true]
        self.problem = RmdpProblem(self.kernels, self.policies)
        self.beta_bound, self.alpha_bound = rmdp_market_bounds(spec.S, spec.A, spec.H, self.T, self.delta,
                                                            spec.eps_S, spec.eps_01)

    @property
    def primary_label(self):
        return self.true_labels[0]

    def oracle(self, seed):
        """Fresh online estimator for one run."""
        eps_prime = self.scenario.estimator.eps_prime
        if self.kind == 'robust-bandit':
            return RobustUniversalEstimator(self.H, self.r, self.T, eps_prime=eps_prime)
        if self.kind == 'linear-bandit':
            return CoveringEstimator(self.cover, self.scenario.linear.radius, self.r, self.T, eps_prime=eps_prime)
        spec = self.scenario.rmdp
        return RmdpMarketEstimator(spec.S, spec.A, spec.H, self.T, spec.eps_S, spec.eps_01, self.policies,
                                   eps_prime=eps_prime, rng=make_rng(seed, 'convert'))

    def environment(self, seed):
        """Fresh environment for one run, drawing from make_rng(seed, 'env')."""
        rng = make_rng(seed, 'env')
        if self.kind == 'rmdp':
            return RmdpEnvironment(self.true_kernel, self.policies, rng, mode=self.scenario.env_mode)
        env = self.scenario.environment
        strategy = EnvStrategy(self.scenario.env_mode, self.env_model, scope=env.scope,
                               script=tuple(env.script))
        return RobustEnvironment(strategy, self.r, rng, monitor=ConsistencyMonitor(self.env_model))

    def action_label(self, a):
        return str(a)

    def outcome_label(self, outcome):
        if self.kind == 'rmdp':
            return '-'.join(str(x) for x in outcome.key())
        return str(self.r.space.labels[outcome])


def _check_membership(runtime):
    """Declared true models must contain what the environment will emit."""
    scenario = runtime.scenario
    if runtime.kind == 'rmdp':
        if not certify_one_bounded(runtime.true_kernel):
            logger.warning('true hypothesis %s failed the 1-boundedness check', runtime.primary_label)
        return
    if runtime.kind == 'linear-bandit':
        lin = scenario.linear
        z = np.asarray(lin.true_point)
        if z.shape != (len(lin.lower),) or np.any(z < np.asarray(lin.lower)) or np.any(z > np.asarray(lin.upper)):
            raise ScenarioValidationError([('linear.true_point', 'point {} lies outside the box'.format(
                lin.true_point))])
    if scenario.env_mode == 'scripted':
        for t, rnd in enumerate(scenario.environment.script):
            for a, probs in enumerate(rnd):
                dist = Dist.from_weights(runtime.r.space, probs)
                if not check_consistency(dist, runtime.env_model, a):
                    raise ScenarioValidationError([('environment.script.{}.{}'.format(t, a),
                                                    'not a member of model {!r}'.format(runtime.env_model.label))])


def build_runtime(scenario):
    """
    Build and check everything a scenario needs before any seed runs.

    Outputs:
        runtime - ScenarioRuntime.
    Library errors raised while building (infeasible beliefs, bad shapes, unknown
    modes) are reported as ScenarioValidationError.
    """

    try:
        runtime = ScenarioRuntime(scenario)
        runtime.environment(scenario.seed_base)
        _check_membership(runtime)
    except ScenarioValidationError:
        raise
    except InfeasibleBeliefError as err:
        raise ScenarioValidationError([(scenario.kind, 'empty belief: {}'.format(err))]) from None
    except (RobustDecError, ValueError, TypeError) as err:
        raise ScenarioValidationError([(scenario.kind, str(err))]) from None
    logger.info('scenario %s validated: %d hypotheses, %d actions', scenario.name, len(runtime.problem.labels),
                runtime.problem.n_actions)
    return runtime


def validate_scenario(path):
    """Load and fully build a scenario file; returns the Scenario."""
    scenario = load_scenario(path)
    build_runtime(scenario)
    return scenario
