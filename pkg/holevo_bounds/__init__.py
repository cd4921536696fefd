from holevo_bounds.utils import load_config


load_config()
