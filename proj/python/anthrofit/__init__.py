try:
    from anthrofit._core import *  # noqa: F401,F403
except ImportError:
    from _core import *  # noqa: F401,F403
