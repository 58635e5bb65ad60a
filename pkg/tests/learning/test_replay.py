import numpy as np
import pytest

from app.core.errors import DomainError
from app.core.learning.neural import Mlp, init
from app.core.learning.replay import (
    ReplayBuffer,
    ReplayTuple,
    decay_epsilon,
    epsilon_greedy,
    replay_push,
    target_values,
)
from app.core.utils.numerics import RngStream


def _item(tag, r=0.0):
    return ReplayTuple(o_prev=np.array([float(tag)]), p=tag, r=r, o_next=np.array([float(tag)]))


def _tags(buf):
    return [item.p for item in buf.tuples]


def test_push_appends_below_capacity():
    buf = ReplayBuffer(capacity=3)
    replay_push(buf, _item(1), batch_size=2)
    replay_push(buf, _item(2), batch_size=2)
    assert _tags(buf) == [1, 2] and len(buf) == 2


def test_full_buffer_drops_the_batch_size_entry():
    buf = ReplayBuffer(capacity=3)
    for tag in (1, 2, 3):
        buf.push(_item(tag), batch_size=2)
    buf.push(_item(4), batch_size=2)
    assert _tags(buf) == [1, 3, 4]
    assert buf.count == 3


def test_fifo_eviction_drops_the_oldest():
    buf = ReplayBuffer(capacity=3, eviction="fifo")
    for tag in (1, 2, 3, 4):
        buf.push(_item(tag), batch_size=2)
    assert _tags(buf) == [2, 3, 4]


def test_invalid_buffers():
    with pytest.raises(DomainError):
        ReplayBuffer(capacity=0)
    with pytest.raises(DomainError):
        ReplayBuffer(capacity=3, eviction="random")


def test_sample_without_replacement(rng):
    buf = ReplayBuffer(capacity=10)
    for tag in range(10):
        buf.push(_item(tag), batch_size=5)
    batch = buf.sample(5, rng)
    assert len({item.p for item in batch}) == 5


def test_sample_larger_than_buffer(rng):
    buf = ReplayBuffer(capacity=10)
    buf.push(_item(1), batch_size=5)
    with pytest.raises(DomainError):
        buf.sample(2, rng)


def test_greedy_choice_breaks_ties_low(rng):
    assert epsilon_greedy(np.array([1.0, 3.0, 3.0]), 0.0, rng) == 1


def test_full_exploration_covers_every_action():
    rng = RngStream(4, 3)
    picks = {epsilon_greedy(np.array([0.0, 10.0, 0.0]), 1.0, rng) for _ in range(200)}
    assert picks == {0, 1, 2}


def test_epsilon_out_of_range(rng):
    with pytest.raises(DomainError):
        epsilon_greedy(np.zeros(2), 1.5, rng)


@pytest.mark.parametrize("eps, expected", [(1.0, 0.995), (0.1, 0.1), (0.102, 0.1)])
def test_epsilon_decay(eps, expected):
    assert decay_epsilon(eps) == pytest.approx(expected)


def _constant_net(value, n_out=3):
    return Mlp(sizes=[1, n_out], weights=[np.zeros((n_out, 1))], biases=[np.full(n_out, value)], dropout=[])


def test_target_value_direct_substitution():
    batch = [ReplayTuple(o_prev=np.zeros(1), p=0, r=-1.0, o_next=np.zeros(1))]
    np.testing.assert_allclose(target_values(batch, _constant_net(2.0), 0.9), [0.8])


def test_target_without_discount_is_the_reward(rng):
    batch = [_item(1, r=-0.5), _item(2, r=-1.5)]
    np.testing.assert_allclose(target_values(batch, init([1, 3, 3], rng), 0.0), [-0.5, -1.5])


def test_zero_target_network_gives_the_reward():
    batch = [_item(1, r=-0.25)]
    np.testing.assert_allclose(target_values(batch, _constant_net(0.0), 0.9), [-0.25])


def test_target_values_need_a_batch():
    with pytest.raises(DomainError):
        target_values([], _constant_net(0.0), 0.9)
