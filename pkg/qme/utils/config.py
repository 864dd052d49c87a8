#
# For licensing see accompanying LICENSE file.
#

from collections.abc import MutableMapping
from itertools import product

import numpy as np
from omegaconf import OmegaConf
from tqdm import tqdm

from qme.errors import ValidationError


def flatten(dictionary, parent_key='', separator='/', dtype=dict):
    items = []
    for key, value in dictionary.items():
        new_key = parent_key + separator + key if parent_key else key
        if isinstance(value, MutableMapping) and value:
            items.extend(flatten(value, new_key, separator=separator).items())
        else:
            items.append((new_key, value))
    return dtype(items)


def unflatten(dictionary, separator='/', dtype=dict):
    result = dtype()
    for key, value in dictionary.items():
        parts = key.split(separator)
        d = result
        for part in parts[:-1]:
            if part not in d:
                d[part] = dtype()
            d = d[part]
        d[parts[-1]] = value
    return result


def get_cfg_items(cfg):
    """ Expand the ``grid`` block into the Cartesian product of configs.

    Each grid key is a '/'-separated path into the config; every expanded
    config gets ``-key=value`` appended to its ``exp_name``.
    """
    grid = OmegaConf.to_container(cfg.grid) if 'grid' in cfg else {}
    if not grid:
        return [cfg], []

    base = flatten(OmegaConf.to_container(cfg), separator='/')
    search_keys = list(grid.keys())
    for key in search_keys:
        if key not in base:
            raise ValidationError(f'grid.{key}', 'no such config entry')
        if not isinstance(grid[key], list) or not grid[key]:
            raise ValidationError(f'grid.{key}', 'expected a non-empty list of values')

    list_of_cfgs = []
    for values in tqdm(list(product(*[grid[k] for k in search_keys])), desc='Expanding grid', leave=False):
        item = {k: v for k, v in base.items() if not k.startswith('grid/')}
        for key, value in zip(search_keys, values):
            item[key] = value
            item['exp_name'] += f'-{key.split("/")[-1]}={value}'
        item = unflatten(item, separator='/')
        item['grid'] = {}
        list_of_cfgs.append(OmegaConf.create(item))
    return list_of_cfgs, search_keys


def grid_values(node, name='grid'):
    """ Values of a grid node: explicit ``values`` or an inclusive start/stop/step range """
    if node.get('values') is not None:
        values = np.asarray(list(node['values']), dtype=float)
    else:
        start, stop, step = node.get('start'), node.get('stop'), node.get('step')
        if start is None or stop is None or step is None:
            raise ValidationError(name, 'needs either values or start/stop/step')
        if step <= 0 or stop < start:
            raise ValidationError(f'{name}.step', 'must be positive with stop >= start')
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = np.round(start + step * np.arange(count), 12)
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise ValidationError(name, 'grid must hold finite values')
    return values
