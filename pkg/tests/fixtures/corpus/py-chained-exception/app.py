def load():
    try:
        open("missing_config.txt")
    except FileNotFoundError:
        raise RuntimeError("configuration unavailable")

load()
