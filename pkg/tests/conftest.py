import numpy as np
import pytest

from v2vsim.channel import ChannelParams, Scenario, VehicleNode


@pytest.fixture
def basic_params():
    return ChannelParams(
        total_bandwidth_hz=20e6,
        num_subchannels=4,
        transmit_power_w=0.2,
        noise_level=1e-9,
        pathloss_exponent=2.7,
        reference_distance_m=10.0,
        reference_gain=1.0,
    )


@pytest.fixture
def two_node_scenario(basic_params):
    params = ChannelParams(
        total_bandwidth_hz=basic_params.total_bandwidth_hz,
        num_subchannels=1,
        transmit_power_w=basic_params.transmit_power_w,
        noise_level=basic_params.noise_level,
        pathloss_exponent=basic_params.pathloss_exponent,
        reference_distance_m=basic_params.reference_distance_m,
    )
    return Scenario(
        nodes=[VehicleNode(0, 0.0, 0.0), VehicleNode(1, 30.0, 40.0)],
        ego_id=0,
        data_volumes_bits=np.array([[0.0, 4e6], [8e6, 0.0]]),
        channel=params,
        beta=0.9,
        min_ego_links=1,
    )


@pytest.fixture
def symmetric_three_node(basic_params):
    params = ChannelParams(
        total_bandwidth_hz=basic_params.total_bandwidth_hz,
        num_subchannels=2,
        transmit_power_w=basic_params.transmit_power_w,
        noise_level=basic_params.noise_level,
        pathloss_exponent=basic_params.pathloss_exponent,
        reference_distance_m=basic_params.reference_distance_m,
    )
    return Scenario(
        nodes=[VehicleNode(0, 0.0, 0.0),
               VehicleNode(1, 50.0, 0.0),
               VehicleNode(2, -50.0, 0.0)],
        ego_id=0,
        data_volumes_bits=np.array([[0.0, 0.0, 0.0],
                                    [5e6, 0.0, 0.0],
                                    [5e6, 0.0, 0.0]]),
        channel=params,
        beta=0.8,
        min_ego_links=2,
    )
