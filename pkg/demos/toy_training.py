"""
Training the toy network
========================

Generate a small synthetic dataset of bright shapes on a noisy background,
train the two-branch network on body and detail labels, and check the
result on held-out scenes. Takes one to two minutes on one core.
"""

from ldf.model import predict
from ldf.synth import synth_generate
from ldf.train import TrainConfig, epoch_means, evaluate_model, train

cfg = TrainConfig(steps=2000, mode="body+detail", n_interactions=1, seed=0)
model, rows = train(cfg)
print(model.n_parameters(), "parameters")

# the loss sits on a plateau for a while before the saliency head lets go
# of its all-foreground guess
means = epoch_means(rows, cfg.n_train // cfg.batch_size)
print("epoch-mean loss every 25 epochs:", [round(float(m), 3) for m in means[::25]])

images, masks = synth_generate(16, cfg.side, seed=123)
mae_all, mae_edge = evaluate_model(model, images, masks)
print(f"held-out MAE {mae_all:.4f}, edge-band MAE {mae_edge:.4f}")

# threshold the saliency map of one scene and draw it next to its mask
body, detail, sal = predict(model, images[:1, None])
sal = sal[0, 0]
for p_row, m_row in zip(sal[::2] > 0.5, masks[0][::2]):
    print("".join("#" if v else "." for v in p_row[::2]), "  ",
          "".join("#" if v else "." for v in m_row[::2]))
