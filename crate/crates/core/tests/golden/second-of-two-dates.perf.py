# Generated by qpbe from:
#   (substr (cpos 15) (cpos 25))


def transform(x):
    if len(x) < 25:
        return None
    return x[15:25]
