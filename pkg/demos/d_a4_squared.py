"""The cobar differential of a4^2 against the closed form it is often quoted with."""
import json

from tqmf.sseq import d_a4_squared

print(json.dumps(d_a4_squared().to_json(), indent=2))
