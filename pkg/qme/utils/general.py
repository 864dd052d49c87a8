#
# For licensing see accompanying LICENSE file.
#

import os
import random

import joblib
import numpy as np
from loguru import logger
from omegaconf import OmegaConf

from qme.utils.config import flatten


def safe_state(seed):
    random.seed(seed)
    np.random.seed(seed)
    logger.debug(f'Seeded random state with {seed}')


def wrap_angles(theta):
    """ Map angles to [-pi, pi) """
    theta = np.asarray(theta, dtype=float)
    wrapped = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(wrapped >= np.pi, wrapped - 2.0 * np.pi, wrapped)


def angle_difference(a, b):
    return wrap_angles(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def get_num_threads(threads=0):
    if threads and threads > 0:
        return int(threads)
    env = os.environ.get('QME_THREADS', '')
    if env.strip():
        try:
            value = int(env)
        except ValueError:
            logger.warning(f'Ignoring non-integer QME_THREADS={env!r}')
        else:
            if value > 0:
                return value
    return joblib.cpu_count()


def find_cfg_diff(default_cfg, cfg, delimiter='_'):
    default_items = flatten(OmegaConf.to_container(default_cfg), separator='.')
    cfg_items = flatten(OmegaConf.to_container(cfg), separator='.')
    diff = []
    for key in sorted(cfg_items):
        if key not in default_items or default_items[key] != cfg_items[key]:
            diff.append(f'{key}-{cfg_items[key]}'.replace(' ', ''))
    return delimiter.join(diff)
