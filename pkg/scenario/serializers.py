from rest_framework import serializers

from symrad.exceptions import ConfigError

from .models import BEAMFORMING_MODES, DEFAULT_AREA_SIDE, SEED_LIMIT, ScenarioConfig
from .utils import square_grid_positions


class PositionField(serializers.ListField):
    child = serializers.FloatField()

    def __init__(self, **kwargs):
        kwargs.setdefault('min_length', 2)
        kwargs.setdefault('max_length', 2)
        super().__init__(**kwargs)


class ScenarioConfigSerializer(serializers.Serializer):
    """Validates a JSON experiment description; absent keys take the reference defaults.

    Powers are in watts only; use the ``dbm`` subcommand to convert.
    """

    num_aps = serializers.IntegerField(min_value=1, required=False)
    antennas_per_ap = serializers.IntegerField(min_value=1, required=False)
    ap_positions = serializers.ListField(child=PositionField(), required=False)
    receiver_position = PositionField(required=False)
    bd_position = PositionField(required=False)
    transmit_power = serializers.FloatField(required=False)
    training_power = serializers.FloatField(required=False)
    noise_power = serializers.FloatField(required=False)
    alpha = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    tau1 = serializers.IntegerField(min_value=1, required=False)
    tau2 = serializers.IntegerField(min_value=1, required=False)
    wavelength = serializers.FloatField(required=False)
    pathloss_exp_ap = serializers.FloatField(required=False)
    pathloss_exp_bd = serializers.FloatField(required=False)
    rho_grid = serializers.ListField(child=serializers.FloatField(), required=False)
    num_trials = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, max_value=SEED_LIMIT - 1, required=False)
    area_side = serializers.FloatField(required=False)
    frame_length = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    perfect_csi_beamforming = serializers.ChoiceField(choices=BEAMFORMING_MODES, required=False)
    empirical_resamples = serializers.IntegerField(min_value=0, required=False)

    def _validate_positive(self, value):
        if not value > 0:
            raise serializers.ValidationError("Must be positive.")
        return value

    validate_transmit_power = _validate_positive
    validate_training_power = _validate_positive
    validate_noise_power = _validate_positive
    validate_wavelength = _validate_positive
    validate_pathloss_exp_ap = _validate_positive
    validate_pathloss_exp_bd = _validate_positive
    validate_area_side = _validate_positive

    def validate_rho_grid(self, value):
        if not value:
            raise serializers.ValidationError("At least one rho value is required.")
        if any(not 0.0 <= rho <= 1.0 for rho in value):
            raise serializers.ValidationError("Every rho must lie in [0, 1].")
        return value

    def validate(self, attrs):
        # A bare num_aps override places the APs on the default square grid.
        if 'num_aps' in attrs and 'ap_positions' not in attrs:
            try:
                attrs['ap_positions'] = square_grid_positions(
                    attrs['num_aps'], attrs.get('area_side', DEFAULT_AREA_SIDE)
                )
            except ConfigError as exc:
                raise serializers.ValidationError({exc.key: exc.message})
        try:
            attrs['config'] = ScenarioConfig(**attrs)
        except ConfigError as exc:
            raise serializers.ValidationError({exc.key: exc.message})
        return attrs

    def save(self, **kwargs):
        return self.validated_data['config']
