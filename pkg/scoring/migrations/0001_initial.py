# Generated migration

from django.db import migrations, models
import django.db.models.deletion
import django.utils.timezone
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='EvaluationRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('preds_path', models.CharField(max_length=1000)),
                ('gold_path', models.CharField(max_length=1000)),
                ('gold_hash', models.CharField(db_index=True, help_text='SHA256 of the gold file bytes', max_length=64)),
                ('subset', models.CharField(blank=True, max_length=50)),
                ('turns', models.PositiveIntegerField(default=0)),
                ('macro_f1', models.FloatField()),
                ('report', models.JSONField(default=dict, help_text='Full MetricsReport')),
                ('created_at', models.DateTimeField(db_index=True, default=django.utils.timezone.now)),
            ],
            options={
                'db_table': 'evaluation_run',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='AuditRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('input_path', models.CharField(max_length=1000)),
                ('content_hash', models.CharField(db_index=True, max_length=64)),
                ('rules', models.JSONField(default=list)),
                ('counts', models.JSONField(default=dict, help_text='Findings per rule')),
                ('total_findings', models.PositiveIntegerField(default=0)),
                ('created_at', models.DateTimeField(db_index=True, default=django.utils.timezone.now)),
            ],
            options={
                'db_table': 'audit_run',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='AuditFinding',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('position', models.PositiveIntegerField()),
                ('rule', models.CharField(db_index=True, max_length=50)),
                ('rule_version', models.PositiveIntegerField(default=1)),
                ('turn_id', models.CharField(db_index=True, max_length=200)),
                ('slot', models.CharField(blank=True, max_length=100)),
                ('evidence', models.TextField()),
                ('severity', models.CharField(choices=[('ambiguity', 'Ambiguity'), ('inconsistency', 'Inconsistency')], max_length=20)),
                ('reason', models.TextField(blank=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='findings', to='scoring.auditrun')),
            ],
            options={
                'db_table': 'audit_finding',
                'ordering': ['run', 'position'],
            },
        ),
        migrations.AddConstraint(
            model_name='auditfinding',
            constraint=models.UniqueConstraint(fields=('run', 'position'), name='unique_audit_finding_position'),
        ),
    ]
