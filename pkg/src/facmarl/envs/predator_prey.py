"""Continuous predator-prey on a toroidal plane.

Slower cooperating predators chase a faster heuristic prey around two large
impassable landmarks.  Double-integrator point-mass physics; the prey picks,
among uniformly sampled candidate accelerations, the one whose one-step
lookahead position maximises distance to the nearest predator.

Reward (standard): +10 whenever a predator overlaps a prey, else 0.
Reward (nonmonotonic variant): +10 for an assisted catch (another predator
close by), -1 for a lone catch, else 0.
"""

from dataclasses import dataclass

import numpy as np

from .base import EnvSpec, StepResult, joint_state
from .toroidal import toroidal_delta, toroidal_distance, wrap

DT = 0.1
DAMPING = 0.25
FORCE_SCALE = 1.0
MAX_SPEED_PREDATOR = 1.0
MAX_SPEED_PREY = 1.3          # "a faster circular prey"
PREDATOR_RADIUS = 0.075
PREY_RADIUS = 0.05
LANDMARK_RADIUS = 0.2
N_LANDMARKS = 2
PREY_CANDIDATES = 32
ASSIST_DISTANCE = 3.0 * PREDATOR_RADIUS
CATCH_REWARD = 10.0
LONE_CATCH_PENALTY = -1.0
PLACEMENT_RETRIES = 200

# Calibrated with envs.calibrate.calibrate_view_radius so that predators see
# each other on roughly 60% of random-play steps (world_size 2).
DEFAULT_VIEW_RADIUS = 0.874

ROLE_PREDATOR = 0
ROLE_PREY = 1
ROLE_LANDMARK = 2


class PlacementError(RuntimeError):
    """Could not place all entities without overlap (world too crowded)."""


@dataclass
class WorldState:
    positions: np.ndarray    # (n_entities, 2) in [0, world_size)
    velocities: np.ndarray   # (n_entities, 2)
    roles: np.ndarray        # (n_entities,) int codes
    radii: np.ndarray        # (n_entities,)
    world_size: float
    timestep: int = 0

    @property
    def n_predators(self):
        return int(np.sum(self.roles == ROLE_PREDATOR))

    @property
    def n_prey(self):
        return int(np.sum(self.roles == ROLE_PREY))

    def predators(self):
        return np.flatnonzero(self.roles == ROLE_PREDATOR)

    def preys(self):
        return np.flatnonzero(self.roles == ROLE_PREY)

    def landmarks(self):
        return np.flatnonzero(self.roles == ROLE_LANDMARK)

    def copy(self):
        return WorldState(self.positions.copy(), self.velocities.copy(),
                          self.roles.copy(), self.radii.copy(),
                          self.world_size, self.timestep)


def obs_size(n_predators, n_prey):
    # own vel+pos, landmarks (rel pos + flag), other predators (rel pos +
    # flag), preys (rel pos + rel vel + flag)
    return 4 + 3 * N_LANDMARKS + 3 * (n_predators - 1) + 5 * n_prey


def pp_reset(spec: EnvSpec, rng) -> tuple:
    """Place entities uniformly at random with no initial overlap."""
    n_pred, n_prey = spec.n_agents, spec.n_prey
    roles = np.array([ROLE_PREDATOR] * n_pred + [ROLE_PREY] * n_prey
                     + [ROLE_LANDMARK] * N_LANDMARKS)
    radii = np.where(roles == ROLE_PREDATOR, PREDATOR_RADIUS,
                     np.where(roles == ROLE_PREY, PREY_RADIUS, LANDMARK_RADIUS))
    n = len(roles)
    positions = np.zeros((n, 2))
    for i in range(n):
        for attempt in range(PLACEMENT_RETRIES):
            cand = rng.uniform(0.0, spec.world_size, size=2)
            if i == 0:
                positions[i] = cand
                break
            dists = toroidal_distance(cand, positions[:i], spec.world_size)
            if np.all(dists > radii[:i] + radii[i]):
                positions[i] = cand
                break
        else:
            raise PlacementError(
                f"could not place entity {i} after {PLACEMENT_RETRIES} tries")
    state = WorldState(positions, np.zeros((n, 2)), roles, radii,
                       spec.world_size, 0)
    obs = build_all_obs(state, spec.view_radius)
    return state, obs, joint_state(obs)


def prey_heuristic(state: WorldState, rng, candidates=None):
    """One action per prey: the sampled move maximising the lookahead distance
    to the nearest predator (toroidal)."""
    pred_idx = state.predators()
    if len(pred_idx) == 0:
        raise ValueError("prey heuristic needs at least one predator")
    pred_pos = state.positions[pred_idx]
    actions = np.zeros((state.n_prey, 2))
    for k, i in enumerate(state.preys()):
        cand = (np.asarray(candidates, dtype=np.float64) if candidates is not None
                else rng.uniform(-1.0, 1.0, size=(PREY_CANDIDATES, 2)))
        vel = state.velocities[i] * (1.0 - DAMPING) + cand * FORCE_SCALE * DT
        speed = np.linalg.norm(vel, axis=1, keepdims=True)
        over = speed > MAX_SPEED_PREY
        vel = np.where(over, vel * (MAX_SPEED_PREY / np.maximum(speed, 1e-12)), vel)
        look = wrap(state.positions[i] + vel * DT, state.world_size)
        d = toroidal_distance(look[:, None, :], pred_pos[None, :, :],
                              state.world_size)
        nearest = d.min(axis=1)
        actions[k] = cand[int(np.argmax(nearest))]
    return actions


def _integrate(state: WorldState, forces, max_speeds):
    """MPE-style damped point-mass step for the moving entities, in place."""
    vel = state.velocities
    vel *= 1.0 - DAMPING
    vel += forces * FORCE_SCALE * DT
    speed = np.linalg.norm(vel, axis=1, keepdims=True)
    cap = max_speeds[:, None]
    over = speed > cap
    np.copyto(vel, np.where(over, vel * (cap / np.maximum(speed, 1e-12)), vel))
    state.positions += vel * DT
    state.positions[:] = wrap(state.positions, state.world_size)


def _resolve_landmarks(state: WorldState):
    """Project movers out of landmark disks (landmarks are impassable)."""
    movers = np.flatnonzero(state.roles != ROLE_LANDMARK)
    for l in state.landmarks():
        lp = state.positions[l]
        delta = toroidal_delta(lp, state.positions[movers], state.world_size)
        dist = np.sqrt(np.sum(delta * delta, axis=1))
        minsep = state.radii[l] + state.radii[movers]
        hit = dist < minsep
        for j, inside in zip(movers[hit], np.flatnonzero(hit)):
            d = delta[inside]
            norm = dist[inside]
            unit = d / norm if norm > 1e-12 else np.array([1.0, 0.0])
            state.positions[j] = wrap(lp + unit * minsep[inside], state.world_size)


def _team_reward(state: WorldState, nonmonotonic: bool, assist_distance):
    pred_idx = state.predators()
    pred_pos = state.positions[pred_idx]
    reward = 0.0
    for y in state.preys():
        d = toroidal_distance(state.positions[y], pred_pos, state.world_size)
        colliders = np.flatnonzero(d < state.radii[y] + state.radii[pred_idx])
        if len(colliders) == 0:
            continue
        if not nonmonotonic:
            reward += CATCH_REWARD
            continue
        if len(colliders) >= 2:
            reward += CATCH_REWARD
            continue
        c = colliders[0]
        others = np.delete(np.arange(len(pred_idx)), c)
        gap = toroidal_distance(pred_pos[c], pred_pos[others], state.world_size)
        if np.any(gap <= assist_distance):
            reward += CATCH_REWARD
        else:
            reward += LONE_CATCH_PENALTY
    return reward


def pp_step(state: WorldState, joint_action, rng, *, view_radius=float("inf"),
            episode_limit=25, nonmonotonic=False,
            assist_distance=ASSIST_DISTANCE) -> StepResult:
    """Advance the world one step under the predators' joint action."""
    joint_action = np.asarray(joint_action, dtype=np.float64)
    if joint_action.shape != (state.n_predators, 2):
        raise ValueError(
            f"expected one 2-vector per predator {(state.n_predators, 2)}, "
            f"got {joint_action.shape}")
    prey_actions = prey_heuristic(state, rng)
    forces = np.zeros_like(state.positions)
    forces[state.predators()] = joint_action
    forces[state.preys()] = prey_actions
    max_speeds = np.where(state.roles == ROLE_PREY, MAX_SPEED_PREY,
                          np.where(state.roles == ROLE_PREDATOR,
                                   MAX_SPEED_PREDATOR, 0.0))
    _integrate(state, forces, max_speeds)
    _resolve_landmarks(state)
    reward = _team_reward(state, nonmonotonic, assist_distance)
    state.timestep += 1
    terminal = state.timestep >= episode_limit
    obs = build_all_obs(state, view_radius)
    return StepResult(obs, joint_state(obs), float(reward), bool(terminal))


def build_obs(state: WorldState, agent_index, view_radius):
    """Fixed-layout local view: own velocity and position, then landmarks,
    other predators and preys as relative blocks zero-masked beyond
    ``view_radius`` (closed ball) with one visibility flag per entity."""
    pred_idx = state.predators()
    if not 0 <= agent_index < len(pred_idx):
        raise ValueError(f"agent index {agent_index} out of range")
    me = pred_idx[agent_index]
    my_pos = state.positions[me]
    my_vel = state.velocities[me]
    parts = [my_vel, my_pos]

    def block(j, with_vel):
        delta = toroidal_delta(my_pos, state.positions[j], state.world_size)
        visible = np.sqrt(delta @ delta) <= view_radius
        if not visible:
            return [np.zeros(4 if with_vel else 2), np.zeros(1)]
        vecs = [delta]
        if with_vel:
            vecs.append(state.velocities[j] - my_vel)
        return [np.concatenate(vecs), np.ones(1)]

    for l in state.landmarks():
        parts += block(l, with_vel=False)
    for j in pred_idx:
        if j != me:
            parts += block(j, with_vel=False)
    for y in state.preys():
        parts += block(y, with_vel=True)
    return np.concatenate(parts)


def build_all_obs(state: WorldState, view_radius):
    return np.stack([build_obs(state, i, view_radius)
                     for i in range(state.n_predators)])


class PredatorPrey:
    """Env wrapper owning the prey-heuristic RNG and the episode clock."""

    discrete = False
    action_dim = 2

    def __init__(self, spec: EnvSpec):
        if not spec.kind.startswith("predator_prey"):
            raise ValueError(f"not a predator-prey spec: {spec.kind}")
        self.spec = spec
        self.nonmonotonic = spec.kind == "predator_prey_nonmonotonic"
        self.n_agents = spec.n_agents
        self.obs_dim = obs_size(spec.n_agents, spec.n_prey)
        self.state_dim = self.n_agents * self.obs_dim
        self.episode_limit = spec.episode_limit
        self._rng = None
        self._state = None

    def reset(self, rng):
        self._rng = rng
        self._state, obs, gstate = pp_reset(self.spec, rng)
        return obs, gstate

    def step(self, actions):
        return pp_step(self._state, np.asarray(actions).reshape(self.n_agents, 2),
                       self._rng, view_radius=self.spec.view_radius,
                       episode_limit=self.episode_limit,
                       nonmonotonic=self.nonmonotonic)

    # checkpointing hooks: world arrays needed for bit-exact resume
    def get_state_arrays(self):
        s = self._state
        if s is None:
            return {}
        return {"pp_positions": s.positions, "pp_velocities": s.velocities,
                "pp_timestep": np.array([s.timestep])}

    def set_state_arrays(self, arrays):
        if not arrays or self._state is None:
            return
        self._state.positions[:] = arrays["pp_positions"]
        self._state.velocities[:] = arrays["pp_velocities"]
        self._state.timestep = int(arrays["pp_timestep"][0])
