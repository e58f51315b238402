# committees/models.py
from django.db import models
from django.core.validators import MinValueValidator


class ExperimentRun(models.Model):
    KIND_CHOICES = [
        ('RUN', 'Single trial'),
        ('SWEEP', 'Committee-size sweep'),
    ]

    kind = models.CharField(max_length=10, choices=KIND_CHOICES, default='RUN')
    label = models.CharField(max_length=200, blank=True)
    config = models.JSONField(default=dict, help_text="Validated experiment configuration as run.")
    space_fingerprint = models.CharField(max_length=64, help_text="Hash of the candidate space's feature names and sizes.")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.get_kind_display()} #{self.pk} ({self.created_at:%Y-%m-%d %H:%M})"


class TrialResult(models.Model):
    STATUS_CHOICES = [
        ('COMPLETED', 'Completed'),
        ('TIMED_OUT', 'Timed out'),
    ]

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='trials')
    strategy = models.CharField(max_length=20)
    committee_size = models.PositiveIntegerField(validators=[MinValueValidator(1)])
    seed = models.PositiveBigIntegerField()
    tau = models.PositiveBigIntegerField(help_text="Candidates screened until the committee was filled.")
    loss = models.FloatField(null=True, blank=True)
    constraint_loss = models.FloatField(null=True, blank=True)
    accepted = models.PositiveIntegerField(default=0)
    rejected = models.PositiveBigIntegerField(default=0)
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default='COMPLETED')
    episodes = models.PositiveIntegerField(default=0)
    cell_counts = models.JSONField(default=list, help_text="Accepted members per feature value.")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['run', 'strategy', 'committee_size', 'seed']
        indexes = [
            models.Index(fields=['strategy', 'committee_size'], name='trial_strategy_k_idx'),
        ]

    def __str__(self):
        return f"{self.strategy} K={self.committee_size} seed={self.seed}: tau={self.tau}"
